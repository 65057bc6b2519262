#!/usr/bin/env python3
"""Regenerates the pinned hash constants in test_hashing.cpp.

Independent of the C++ code: mt19937_64 and GF(2^64) arithmetic are written
out bit by bit here.
"""

MASK = (1 << 64) - 1
MODULUS = (1 << 64) | 0x1B


class MT19937_64:
    def __init__(self, seed):
        self.mt = [0] * 312
        self.mt[0] = seed & MASK
        for i in range(1, 312):
            prev = self.mt[i - 1]
            self.mt[i] = (6364136223846793005 * (prev ^ (prev >> 62)) + i) & MASK
        self.index = 312

    def twist(self):
        upper, lower = 0xFFFFFFFF80000000, 0x7FFFFFFF
        for i in range(312):
            x = (self.mt[i] & upper) | (self.mt[(i + 1) % 312] & lower)
            xa = x >> 1
            if x & 1:
                xa ^= 0xB5026F5AA96619E9
            self.mt[i] = self.mt[(i + 156) % 312] ^ xa
        self.index = 0

    def __call__(self):
        if self.index >= 312:
            self.twist()
        y = self.mt[self.index]
        self.index += 1
        y ^= (y >> 29) & 0x5555555555555555
        y ^= (y << 17) & 0x71D67FFFEDA60000
        y ^= (y << 37) & 0xFFF7EEE000000000
        y ^= y >> 43
        return y & MASK


def gf_mul(a, b):
    r = 0
    for i in range(64):
        if (b >> i) & 1:
            r ^= a << i
    for i in range(127, 63, -1):
        if (r >> i) & 1:
            r ^= MODULUS << (i - 64)
    return r


def poly(c, x):
    c3, c2, c1, c0 = c
    return gf_mul(gf_mul(gf_mul(c3, x) ^ c2, x) ^ c1, x) ^ c0


if __name__ == "__main__":
    seed = 0x5EED
    rng = MT19937_64(seed)
    sign = tuple(rng() for _ in range(4))
    slice_ = tuple(rng() for _ in range(4))
    print("sign coeffs", [hex(c) for c in sign])
    print("slice coeffs", [hex(c) for c in slice_])
    for x in (0, 1, 2, 0xFFFF, 0x3FFFFFFF):
        v = poly(sign, x)
        print(f"sign h({x:#x}) = {v:#018x} bit0={v & 1}")
    for x in (0, 1, 0xBEEF):
        print(f"slice h({x:#x}) low4 = {poly(slice_, x) & 15}")
    a, b = 0x0123456789ABCDEF, 0xFEDCBA9876543210
    print(f"mul {a:#x} {b:#x} = {gf_mul(a, b):#018x}")
    print(f"mul 2^63 * 2 = {gf_mul(1 << 63, 2):#x}")
