import os

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # pure-Python install; kernels fall back at import
    cythonize = None

ext_modules = []
if cythonize is not None and not os.environ.get("CONVERGELAB_NO_EXT"):
    ext_modules = cythonize(
        [
            Extension(
                "convergelab._kernels",
                ["src/convergelab/_kernels.pyx"],
                include_dirs=["src/convergelab"],
                extra_compile_args=["-O3", "-ffp-contract=off"],
            )
        ],
        compiler_directives={"language_level": 3, "embedsignature": True},
    )

setup(ext_modules=ext_modules)
