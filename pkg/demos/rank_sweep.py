"""
Error against POD rank
======================

Mean test error of registered and unregistered ROMs for a range of
ranks, for either benchmark. Equivalent to ``xcorr-rom sweep``.
"""

import sys

from xcorr_rom import (VortexParams, default_reference_index, generate_vortex, generate_wave,
                       rank_sweep, split)

case = sys.argv[1] if len(sys.argv) > 1 else "wave"
ranks = (1, 2, 5, 10, 15, 20, 25)

if case == "wave":
    train, test = split(generate_wave(), 0.5)
    ref = default_reference_index(train.times, 3.03)
    opts = {}
else:
    train, test = split(generate_vortex(VortexParams(sizes=(120, 60))), 0.3)
    ref = default_reference_index(train.times)
    opts = {"background": 1.0}

reg = rank_sweep(train, test, ranks, True, reference_index=ref, **opts)
raw = rank_sweep(train, test, ranks, False, reference_index=ref, **opts)
print(" rank   registered   unregistered")
for (r, a), (_, b) in zip(reg, raw):
    print(f"{r:5d}   {a:.4e}   {b:.4e}")
