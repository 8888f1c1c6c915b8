"""Pure-Python Philox4x64-10 reference used to freeze RNG test vectors.

Output block for (key0=seed, key1=stream, ctr=(block, substream, 0, 0)).
Cross-checked against numpy.random.Philox, which increments its counter
before generating, so numpy(counter=c) emits block(c + 1).
"""
import sys

M64 = (1 << 64) - 1
MUL0 = 0xD2E7470EE14C6C93
MUL1 = 0xCA5A826395121157
W0 = 0x9E3779B97F4A7C15
W1 = 0xBB67AE8584CAA73B


def mulhilo(a, b):
    p = a * b
    return p >> 64, p & M64


def philox4x64_10(ctr, key):
    c = list(ctr)
    k0, k1 = key
    for r in range(10):
        hi0, lo0 = mulhilo(MUL0, c[0])
        hi1, lo1 = mulhilo(MUL1, c[2])
        c = [hi1 ^ c[1] ^ k0, lo1, hi0 ^ c[3] ^ k1, lo0]
        k0 = (k0 + W0) & M64
        k1 = (k1 + W1) & M64
    return c


def stream(seed, stream_id, substream, count):
    out = []
    block = 0
    while len(out) < count:
        out.extend(philox4x64_10((block, substream, 0, 0), (seed, stream_id)))
        block += 1
    return out[:count]


def uniform_index(words, n):
    """Rejection rule: threshold = 2^64 mod n; accept u >= threshold; return u % n."""
    threshold = ((1 << 64) - n) % n
    it = iter(words)
    while True:
        u = next(it)
        if u >= threshold:
            return u % n, it


def check_against_numpy():
    import numpy as np
    for seed, sid, sub in [(0, 0, 0), (42, 7, 3), (2**63 + 5, 11, 0)]:
        # numpy adds one (with carry) before the first block: pick the
        # counter that rolls over to (0, sub, 0, 0).
        if sub == 0:
            ctr = [M64, M64, M64, M64]
        else:
            ctr = [M64, sub - 1, 0, 0]
        bg = np.random.Philox(key=np.array([seed, sid], dtype=np.uint64),
                              counter=np.array(ctr, dtype=np.uint64))
        raw = [int(x) for x in bg.random_raw(8)]
        assert raw == stream(seed, sid, sub, 8), (seed, sid, sub)
    print("numpy agreement: ok")


if __name__ == "__main__":
    check_against_numpy()
    for seed, sid, sub in [(0, 0, 0), (42, 7, 3), (20240611, 2, 5)]:
        print(seed, sid, sub, [hex(x) for x in stream(seed, sid, sub, 6)])
    # with-replacement sampler trace: seed 99, stream 1 (sampler), substream 0, n=2, b=4
    words = iter(stream(99, 1, 0, 64))
    idx = []
    for _ in range(4):
        i, words = uniform_index(words, 2)
        idx.append(i)
    print("with_replacement n=2 b=4 seed=99:", idx)
    words = iter(stream(99, 1, 0, 64))
    idx = []
    for _ in range(12):
        i, words = uniform_index(words, 7)
        idx.append(i)
    print("with_replacement n=7 b=12 seed=99:", idx)
