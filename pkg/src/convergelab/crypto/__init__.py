from convergelab.crypto.aka import (
    AkaResult,
    AuthVector,
    MacFailure,
    RejectAuts,
    ServerSqn,
    SqnState,
    SubscriberKey,
    SyncFailure,
    generate_vector,
    resynchronize,
    verify_autn,
)
from convergelab.crypto.ec import (
    INFINITY,
    P256,
    TOY_CURVE,
    CurveParams,
    InfinityResult,
    InvalidScalar,
    PointNotOnCurve,
    decode_point,
    ecdh_shared,
    encode_point,
    point_add,
    public_key,
    scalar_mul,
)
from convergelab.crypto.symmetric import AuthFail, kdf, mac, prf, sym_decrypt, sym_encrypt, verify_mac

__all__ = [
    "AkaResult",
    "AuthFail",
    "AuthVector",
    "CurveParams",
    "INFINITY",
    "InfinityResult",
    "InvalidScalar",
    "MacFailure",
    "P256",
    "PointNotOnCurve",
    "RejectAuts",
    "ServerSqn",
    "SqnState",
    "SubscriberKey",
    "SyncFailure",
    "TOY_CURVE",
    "decode_point",
    "ecdh_shared",
    "encode_point",
    "generate_vector",
    "kdf",
    "mac",
    "point_add",
    "prf",
    "public_key",
    "resynchronize",
    "scalar_mul",
    "sym_decrypt",
    "sym_encrypt",
    "verify_autn",
    "verify_mac",
]
