#!/usr/bin/env python3
# Independent reference for the byte-level values frozen into the unit tests.
# Uses hashlib and the `cryptography` Ed25519 implementation only.
import hashlib
import struct

from cryptography.hazmat.primitives.asymmetric.ed25519 import Ed25519PrivateKey
from cryptography.hazmat.primitives import serialization


def u64(v):
    return struct.pack(">Q", v)


def sha(b):
    return hashlib.sha256(b).digest()


def derive_seed(run_seed, label, index):
    lb = label.encode()
    return sha(b"BRICK/seed" + u64(run_seed) + u64(len(lb)) + lb + u64(index))


def pubkey(seed):
    k = Ed25519PrivateKey.from_private_bytes(seed)
    return k.public_key().public_bytes(serialization.Encoding.Raw, serialization.PublicFormat.Raw)


def sign(seed, msg):
    return Ed25519PrivateKey.from_private_bytes(seed).sign(msg)


def state_bytes(seq, a, b, salt):
    return b"BRICK/state" + u64(seq) + u64(a) + u64(b) + salt


def chain_head(prev, commitment, seq):
    return sha(prev + commitment + u64(seq))


def main():
    print("sha256(abc)", sha(b"abc").hex())
    s = derive_seed(7, "party", 0)
    print("derive_seed(7,party,0)", s.hex())
    print("derive_u64(7,party,0)", int.from_bytes(s[:8], "big"))
    print("pk(party0)", pubkey(s).hex())
    channel = sha(derive_seed(7, "channel", 0))
    print("channel(7)", channel.hex())
    ann5 = b"BRICK/seq" + channel + u64(5)
    print("sig(party0, announce seq5)", sign(s, ann5).hex())
    salt = bytes([0x11]) * 32
    c = sha(state_bytes(5, 7, 5, salt))
    print("commit(5,7,5,0x11)", c.hex())
    head = bytes(32)
    for seq, a, b in [(1, 6, 6), (2, 8, 4), (3, 5, 7)]:
        head = chain_head(head, sha(state_bytes(seq, a, b, salt)), seq)
        print(f"head{seq}", head.hex())

    # fraudulent close: max over m in [0,f], y in [0,n]
    for v, f, eps in [(12, 3, 1), (100, 3, 1), (200, 5, 2)]:
        coll = -(-v // f)
        best = max(v + (m + y) * coll - (y + m + 1) * (coll + eps)
                   for m in range(f + 1) for y in range(3 * f + 2))
        print(f"max_fraud(v={v},f={f},eps={eps})", best, "bound", v - coll - eps)


if __name__ == "__main__":
    main()
