"""3G-WLAN interworking authentication laboratory."""

__version__ = "0.1.0"
