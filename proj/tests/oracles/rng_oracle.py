"""Reference streams for SplitMix64 and xoshiro256** (pure Python).

SplitMix64 seeded with 0 must start 0xe220a8397b1dcdaf, the value listed in
the reference implementation's documentation. Values printed here are frozen
into tests/test_random_sim.cpp.
"""
M = (1 << 64) - 1


def splitmix64(state):
    while True:
        state = (state + 0x9E3779B97F4A7C15) & M
        z = state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & M
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & M
        yield z ^ (z >> 31)


def rotl(x, k):
    return ((x << k) | (x >> (64 - k))) & M


def xoshiro(s):
    s = list(s)
    while True:
        result = (rotl((s[1] * 5) & M, 7) * 9) & M
        t = (s[1] << 17) & M
        s[2] ^= s[0]
        s[3] ^= s[1]
        s[1] ^= s[2]
        s[0] ^= s[3]
        s[2] ^= t
        s[3] = rotl(s[3], 45)
        yield result


JUMP = [0x180EC6D33CFD0ABA, 0xD5A61266F0C9392C, 0xA9582618E03FC9AA, 0x39ABDC4529B1661C]


def step(s):
    t = (s[1] << 17) & M
    s[2] ^= s[0]
    s[3] ^= s[1]
    s[1] ^= s[2]
    s[0] ^= s[3]
    s[2] ^= t
    s[3] = rotl(s[3], 45)


def jump(s):
    out = [0, 0, 0, 0]
    for word in JUMP:
        for b in range(64):
            if word & (1 << b):
                out = [a ^ c for a, c in zip(out, s)]
            step(s)
    return out


def box_muller(gen, n):
    from mpmath import mp, mpf, sqrt, log, cos, sin, pi

    mp.dps = 40
    out = []
    while len(out) < n:
        u1 = mpf((next(gen) >> 11) + 1) / 2**53
        u2 = mpf(next(gen) >> 11) / 2**53
        r = sqrt(-2 * log(u1))
        out += [r * cos(2 * pi * u2), r * sin(2 * pi * u2)]
    return out[:n]


def take(gen, n):
    return [next(gen) for _ in range(n)]


if __name__ == "__main__":
    print("splitmix64(0):", [hex(v) for v in take(splitmix64(0), 4)])
    print("xoshiro(1,2,3,4):", [hex(v) for v in take(xoshiro([1, 2, 3, 4]), 5)])
    sm = splitmix64(42)
    state = take(sm, 4)
    print("xoshiro(seed=42):", [hex(v) for v in take(xoshiro(state), 3)])
    print("xoshiro(1,2,3,4) jumped:", [hex(v) for v in jump([1, 2, 3, 4])])
    jumped = jump(list(take(splitmix64(42), 4)))
    print("xoshiro(seed=42) jumped, first draw:", hex(next(xoshiro(jumped))))
    print("normals(seed=42):", [format(float(v), ".17g") for v in box_muller(xoshiro(take(splitmix64(42), 4)), 4)])
