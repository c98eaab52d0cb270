import random

import pytest

from convergelab.crypto.symmetric import AuthFail, mac, prf, sym_decrypt, sym_encrypt, verify_mac


def test_prf_deterministic():
    k = bytes(range(16))
    assert prf(k, 7, b"data", 128) == prf(k, 7, b"data", 128)


@pytest.mark.parametrize("bits", [8, 48, 64, 128, 256, 512])
def test_prf_output_length(bits):
    assert len(prf(b"k" * 16, 1, b"", bits)) * 8 == bits


def test_prf_rejects_oversize():
    with pytest.raises(ValueError):
        prf(b"k", 1, b"", 520)


def test_prf_tag_separation():
    rng = random.Random(3)
    seen = set()
    for _ in range(100):
        k = rng.randbytes(16)
        a, b = prf(k, 1, b"x", 128), prf(k, 2, b"x", 128)
        assert a != b
        seen.update((a, b))
    assert len(seen) == 200


def test_mac_roundtrip():
    assert verify_mac(b"key", b"message", mac(b"key", b"message"))


def test_mac_single_bit_flips():
    rng = random.Random(5)
    key, msg = rng.randbytes(16), rng.randbytes(32)
    tag = mac(key, msg)
    for i in range(len(msg) * 8):
        flipped = bytearray(msg)
        flipped[i // 8] ^= 1 << (i % 8)
        assert not verify_mac(key, bytes(flipped), tag)


def test_mac_wrong_keys():
    rng = random.Random(6)
    key, msg = rng.randbytes(16), b"hello"
    tag = mac(key, msg)
    for _ in range(100):
        other = rng.randbytes(16)
        assert other == key or not verify_mac(other, msg, tag)


def test_verify_mac_never_raises_on_garbage():
    assert verify_mac(b"k", b"m", b"") is False
    assert verify_mac(b"k", b"m", b"\x00" * 40) is False


def test_encrypt_empty():
    key, nonce = b"\x01" * 16, b"\x02" * 12
    assert sym_decrypt(key, nonce, sym_encrypt(key, nonce, b"")) == b""


def test_encrypt_roundtrip_random():
    rng = random.Random(8)
    for _ in range(100):
        key, nonce, pt = rng.randbytes(16), rng.randbytes(12), rng.randbytes(1024)
        assert sym_decrypt(key, nonce, sym_encrypt(key, nonce, pt)) == pt


def test_ciphertext_mutation_detected():
    rng = random.Random(9)
    key, nonce = rng.randbytes(16), rng.randbytes(12)
    ct = sym_encrypt(key, nonce, b"secret identity 001010123456789")
    for pos in range(len(ct)):
        bad = bytearray(ct)
        bad[pos] ^= 0x40
        with pytest.raises(AuthFail):
            sym_decrypt(key, nonce, bytes(bad))


def test_aad_binding():
    key, nonce = b"\x01" * 16, b"\x02" * 12
    ct = sym_encrypt(key, nonce, b"x", aad=b"a")
    with pytest.raises(AuthFail):
        sym_decrypt(key, nonce, ct, aad=b"b")
