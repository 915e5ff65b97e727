#!/usr/bin/env python3
"""Regenerate src/sobol_data.cpp from scipy's bundled Joe-Kuo direction numbers.

Usage: python3 tools/gen_sobol_data.py > src/sobol_data.cpp
"""
import numpy as np
import scipy.stats._sobol as sb
import os

NDIM = 2048  # generated table covers this many dimensions

path = os.path.join(os.path.dirname(sb.__file__), "_sobol_direction_numbers.npz")
data = np.load(path)
poly = data["poly"].astype(np.uint32)
vinit = data["vinit"].astype(np.uint32)

# row 0 of scipy's table is the van der Corput dimension (poly = 1, no m
# values); the generator skips it, the C++ side special-cases dimension 0.
poly = poly[1:NDIM]
vinit = vinit[1:NDIM]

rows = []
degrees = []
for d in range(NDIM - 1):
    p = int(poly[d])
    s = p.bit_length() - 1
    degrees.append(s)
    rows.append([int(x) for x in vinit[d, :s]])

flat = [m for row in rows for m in row]

print("// Joe-Kuo Sobol direction-number table (new-joe-kuo-6), first %d dimensions." % NDIM)
print("// Generated by tools/gen_sobol_data.py from scipy's bundled copy; do not edit.")
print("#include <cstdint>")
print()
print("namespace statrom::detail {")
print()
print("extern const int kSobolTableDims = %d;" % NDIM)
print()
print("// primitive polynomial coefficients (including leading/trailing 1 bits),")
print("// one entry per dimension >= 1; dimension 0 uses m_k = 1 for all k.")
print("extern const std::uint32_t kSobolPoly[%d] = {" % (NDIM - 1))
for i in range(0, NDIM - 1, 16):
    print("  " + ", ".join(str(int(poly[j])) for j in range(i, min(i + 16, NDIM - 1))) + ",")
print("};")
print()
print("// initial direction integers m_1..m_s per dimension, flattened; degree s")
print("// is poly bit-length minus one, offsets are the running sum of degrees.")
print("extern const std::uint32_t kSobolMinit[%d] = {" % len(flat))
for i in range(0, len(flat), 20):
    print("  " + ", ".join(str(x) for x in flat[i:i + 20]) + ",")
print("};")
print()
print("extern const int kSobolMinitCount = %d;" % len(flat))
print()
print("}  // namespace statrom::detail")
