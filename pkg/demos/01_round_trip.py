"""Encrypt to an identity, extract its key, decrypt.

Runs on BLS12-381 by default. Pass ``--toy`` for the instant (and insecure)
discrete-log-transparent group.
"""

import random
import sys
import time

from nibe import formats
from nibe.bilinear import WIRE_TOY_PRIME, CurveGroup, ToyGroup
from nibe.ibe import PRODUCTION_PROFILE, decrypt, encode_identity, encrypt, keygen, setup

toy = "--toy" in sys.argv
group = ToyGroup(WIRE_TOY_PRIME) if toy else CurveGroup()
rng = random.Random(2024)

t0 = time.perf_counter()
params, master = setup(PRODUCTION_PROFILE, group, rng)
print(f"setup: n={params.config.n} blocks of ell={params.config.ell} bits, "
      f"{params.element_count} public elements ({time.perf_counter() - t0:.2f}s)")

identity = b"alice@example.com"
v = encode_identity(identity, params.config)
print("identity blocks:", " ".join(f"{b:08x}" for b in v))

key = keygen(params, master, v, rng)
m = group.random_target(rng)
ct = encrypt(params, v, m, rng)
assert decrypt(params, key, ct) == m
print("target-group message recovered")

# byte payloads travel inside a KEM-DEM envelope
envelope = formats.seal(params, identity, b"meet at the usual place", rng)
print(f"envelope: {len(envelope)} bytes ->", formats.open_envelope(params, key, envelope))

other = keygen(params, master, encode_identity(b"mallory@example.com", params.config), rng)
try:
    formats.open_envelope(params, other, envelope)
except Exception as exc:  # TagMismatch
    print("someone else's key:", type(exc).__name__)
