"""Deterministic random streams for reproducible dataset generation.

All randomness flows through splitmix64-seeded xoshiro256++ generators.
Streams are derived, never shared: each example gets its own seed from the
dataset seed, each purpose (synthesis params, body mask, coil maps, noise,
...) gets its own substream from the example seed, and bulk noise fields use
one lane per (coil, frame). Content therefore never depends on worker count
or generation order.

Uniform doubles use the top 53 bits of each 64-bit word; Gaussian variates
come from Box-Muller applied to consecutive uniform pairs.
"""

import numpy as np

MASK64 = 0xFFFFFFFFFFFFFFFF
GOLDEN64 = 0x9E3779B97F4A7C15

# Fixed purpose enumeration; indices are part of the on-disk contract.
PURPOSES = ("fractal", "synthesis", "mask", "phase", "coils", "noise")


def splitmix64(state):
    """One splitmix64 step as a pure function of the 64-bit state.

    Returns the mixed output for ``state`` (the canonical generator's first
    output when run from that state).
    """
    z = (state + GOLDEN64) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return (z ^ (z >> 31)) & MASK64


def splitmix64_sequence(seed, n):
    """First ``n`` outputs of splitmix64 started from state ``seed``."""
    out = []
    state = seed & MASK64
    for _ in range(n):
        state = (state + GOLDEN64) & MASK64
        z = state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        out.append((z ^ (z >> 31)) & MASK64)
    return out


def derive_seed(seed, k):
    """Child seed ``k`` of ``seed``: splitmix64(seed XOR k*golden ratio)."""
    return splitmix64((seed ^ ((k * GOLDEN64) & MASK64)) & MASK64)


def example_seed(dataset_seed, index):
    """Seed owning everything sampled for example ``index``."""
    return derive_seed(dataset_seed, index)


def purpose_seed(ex_seed, purpose):
    """Substream seed for one named purpose within an example."""
    return derive_seed(ex_seed, PURPOSES.index(purpose))


def derive_rng(dataset_seed, index, purpose):
    """Generator for (dataset seed, example index, purpose tag)."""
    return Xoshiro256pp(purpose_seed(example_seed(dataset_seed, index), purpose))


def _rotl(x, k):
    return ((x << k) | (x >> (64 - k))) & MASK64


class Xoshiro256pp:
    """Scalar xoshiro256++ generator, state seeded via splitmix64.

    The four state words are the first four splitmix64 outputs from the
    given seed, matching the seeding procedure recommended for the xoshiro
    family.
    """

    def __init__(self, seed):
        self._s = splitmix64_sequence(seed, 4)

    def next_u64(self):
        s0, s1, s2, s3 = self._s
        result = (_rotl((s0 + s3) & MASK64, 23) + s0) & MASK64
        t = (s1 << 17) & MASK64
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = _rotl(s3, 45)
        self._s = [s0, s1, s2, s3]
        return result

    def raw_bytes(self, n):
        """First ``n`` bytes of the stream (u64 words, little-endian)."""
        nwords = -(-n // 8)
        buf = b"".join(self.next_u64().to_bytes(8, "little") for _ in range(nwords))
        return buf[:n]

    def uniform(self):
        """One double in [0, 1) from the top 53 bits."""
        return (self.next_u64() >> 11) * 2.0**-53

    def uniforms(self, n):
        return np.array([self.uniform() for _ in range(n)], dtype=np.float64)

    def uniform_in(self, lo, hi):
        return lo + (hi - lo) * self.uniform()

    def normals(self, n):
        """``n`` standard normals via Box-Muller on consecutive pairs."""
        npairs = -(-n // 2)
        u = self.uniforms(2 * npairs)
        return _box_muller(u[0::2], u[1::2])[:n]


def _box_muller(u1, u2):
    """Interleaved (cos, sin) Box-Muller normals from uniform pairs."""
    r = np.sqrt(-2.0 * np.log1p(-u1))
    ang = 2.0 * np.pi * u2
    z = np.empty(2 * len(np.atleast_1d(u1)), dtype=np.float64)
    z[0::2] = r * np.cos(ang)
    z[1::2] = r * np.sin(ang)
    return z


class XoshiroLanes:
    """Batch of independent xoshiro256++ streams advanced in lock step.

    Produces, per lane, exactly the same sequence as a scalar
    :class:`Xoshiro256pp` built from that lane's seed; vectorizing across
    lanes only buys speed. Used for the per-(coil, frame) noise fields.
    """

    _U64 = np.uint64

    def __init__(self, seeds):
        state = np.empty((4, len(seeds)), dtype=np.uint64)
        for i, seed in enumerate(seeds):
            words = splitmix64_sequence(int(seed), 4)
            state[:, i] = words
        self._s = state

    @property
    def n_lanes(self):
        return self._s.shape[1]

    def _next_block(self, steps):
        """(steps, lanes) array of raw u64 outputs."""
        s0, s1, s2, s3 = self._s
        out = np.empty((steps, self.n_lanes), dtype=np.uint64)
        u = self._U64
        for i in range(steps):
            tmp = s0 + s3
            out[i] = ((tmp << u(23)) | (tmp >> u(41))) + s0
            t = s1 << u(17)
            s2 = s2 ^ s0
            s3 = s3 ^ s1
            s1 = s1 ^ s2
            s0 = s0 ^ s3
            s2 = s2 ^ t
            s3 = (s3 << u(45)) | (s3 >> u(19))
        self._s = np.stack([s0, s1, s2, s3])
        return out

    def uniforms(self, n, chunk=4096):
        """(lanes, n) doubles in [0, 1), per-lane sequential order."""
        out = np.empty((self.n_lanes, n), dtype=np.float64)
        done = 0
        while done < n:
            m = min(chunk, n - done)
            block = self._next_block(m) >> self._U64(11)
            out[:, done:done + m] = block.T * 2.0**-53
            done += m
        return out

    def normals(self, n):
        """(lanes, n) standard normals, Box-Muller per lane."""
        npairs = -(-n // 2)
        u = self.uniforms(2 * npairs)
        r = np.sqrt(-2.0 * np.log1p(-u[:, 0::2]))
        ang = 2.0 * np.pi * u[:, 1::2]
        z = np.empty((self.n_lanes, 2 * npairs), dtype=np.float64)
        z[:, 0::2] = r * np.cos(ang)
        z[:, 1::2] = r * np.sin(ang)
        return z[:, :n]
