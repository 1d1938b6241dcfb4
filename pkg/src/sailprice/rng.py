"""Portable pseudorandom stream.

The generator is xorshift64* (Vigna, 2016) with its 64-bit state seeded by one
round of SplitMix64, so any 64-bit seed (including 0) gives a valid nonzero
state. Everything below is defined by integer arithmetic mod 2**64 and can be
reproduced bit-for-bit in any language:

    seeding:   z = (seed + 0x9E3779B97F4A7C15) mod 2**64
               z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
               z = (z ^ (z >> 27)) * 0x94D049BB133111EB
               state = z ^ (z >> 31)          (replaced by 1 if zero)

    next_u64:  x ^= x >> 12; x ^= x << 25; x ^= x >> 27
               state = x;  return (x * 0x2545F4914F6CDD1D) mod 2**64

    uniform:   (next_u64() >> 11) * 2**-53            in [0, 1)
    below(m):  next_u64() mod m                       in [0, m)
    gauss:     Box-Muller cosine branch, one normal per two uniforms:
               sqrt(-2 ln(1 - u1)) * cos(2 pi u2)
"""

import math

MASK64 = 0xFFFFFFFFFFFFFFFF


def splitmix64(seed):
    z = (seed + 0x9E3779B97F4A7C15) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


class XorShift64Star:
    def __init__(self, seed):
        if seed < 0:
            raise ValueError("seed must be a non-negative 64-bit integer")
        self.state = splitmix64(seed & MASK64) or 1

    def next_u64(self):
        x = self.state
        x ^= x >> 12
        x ^= (x << 25) & MASK64
        x ^= x >> 27
        self.state = x
        return (x * 0x2545F4914F6CDD1D) & MASK64

    def uniform(self, low=0.0, high=1.0):
        u = (self.next_u64() >> 11) * (1.0 / 9007199254740992.0)
        return low + (high - low) * u

    def below(self, m):
        if m <= 0:
            raise ValueError("bound must be positive")
        return self.next_u64() % m

    def gauss(self, mean=0.0, std=1.0):
        u1 = self.uniform()
        u2 = self.uniform()
        z = math.sqrt(-2.0 * math.log(1.0 - u1)) * math.cos(2.0 * math.pi * u2)
        return mean + std * z

    def shuffle(self, items):
        """Fisher-Yates, in place, walking i from the end."""
        for i in range(len(items) - 1, 0, -1):
            j = self.below(i + 1)
            items[i], items[j] = items[j], items[i]
        return items
