"""Search scale-homogeneous representatives that realize a target boundary.

Development aid for the fixture files; not part of the package.
usage: python3 scripts/search_fixture.py figure8|tilted [seed]
"""
import math
import random
import sys

from tanglefloer.chain import quotient_boundary, raw_differential
from tanglefloer.grading import resolve_grading
from tanglefloer.tangle import Point, classify_orbits, emit_tangle, from_representatives

FIGURE8 = {
    "orbits": {  # pair, mu, crossing sign
        "p": ("u+s+", -1, -1), "q": ("u+s+", -2, 1),
        "b": ("u+s-", -2, 1), "r": ("u+s-", -3, -1),
        "pt": ("u-s-", -1, -1), "qt": ("u-s-", -2, 1),
        "bt": ("u-s+", -2, 1), "rt": ("u-s+", -3, -1),
    },
    # quotient boundaries, m-signs and n-signs
    "m": {"p": {"b": 1, "bt": -1}, "pt": {"b": -1, "bt": 1}, "q": {"r": -1, "rt": 1},
          "qt": {"r": 1, "rt": -1}, "b": {}, "bt": {}},
    "n": {"p": {"b": 1, "bt": -1}, "pt": {"b": 1, "bt": -1}, "q": {"r": -1, "rt": -1},
          "qt": {"r": 1, "rt": 1}, "b": {}, "bt": {}},
    "orientation": "u_plus",
    "require": [("p", "q", 0), ("p", "q", -1), ("b", "r", 0), ("bt", "rt", 0)],
    "forbid": [("p", "q", 1)],
}

TILTED = {
    "orbits": {
        "p": ("u+s+", -1, 1), "q": ("u+s+", -2, -1),
        "s": ("u+s-", 2, 1), "r": ("u+s-", 1, -1),
        "pt": ("u-s-", 3, -1), "qt": ("u-s-", 2, 1),
        "st": ("u-s+", 2, 1), "rt": ("u-s+", 1, -1),
    },
    "m": {"pt": {"s": -1, "st": 1}, "qt": {"r": 1, "rt": -1}, "s": {}, "st": {}, "p": {}},
    "n": {"pt": {"s": 1, "st": -1}, "qt": {"r": 1, "rt": 1}, "s": {}, "st": {}, "p": {}},
    "orientation": "u_plus",
    "require": [("p", "q", 0), ("s", "r", 0)],
    "forbid": [],
}

WINDOW = 6


def build(spec, logs):
    reps = []
    for name, (pair, mu, sign) in spec["orbits"].items():
        lu, ls = logs[name]
        su = 1 if pair[1] == "+" else -1
        ss = 1 if pair[3] == "+" else -1
        reps.append(Point(name, 0, su * 2.0 ** lu, ss * 2.0 ** ls, sign, mu=mu))
    return from_representatives(reps, window=WINDOW)


def quotient(t, signs):
    c = quotient_boundary(t, "primary", signs)
    out = {}
    for k, m in c.boundaries.items():
        for i, row in enumerate(m):
            for j, v in enumerate(row):
                if v:
                    out.setdefault(c.generators[k][j], {})[c.generators[k - 1][i]] = v
    return out


def score(spec, logs):
    try:
        t = build(spec, logs)
    except Exception:
        return 10 ** 6, None
    kinds = classify_orbits(t)
    bad = sum(k != "primary" for k in kinds.values()) * 5
    if bad:
        return bad + 20, t
    g = resolve_grading(t)
    _, raw = raw_differential(t, "primary", "m", g)
    for p, q, e in spec["require"]:
        bad += (q, p) not in raw or raw[(q, p)].c.get(e, 0) == 0
    for p, q, e in spec["forbid"]:
        bad += (q, p) in raw and raw[(q, p)].c.get(e, 0) != 0
    for signs, key in (("m", "m"), (spec["orientation"], "n")):
        got = quotient(t, signs)
        for p, want in spec[key].items():
            have = got.get(p, {})
            bad += sum(want.get(k) != have.get(k) for k in set(want) | set(have))
    return bad, t


def quantize(v):
    return round(v * 64) / 64


def search(spec, seed, restarts=200, steps=4000):
    rng = random.Random(seed)
    names = list(spec["orbits"])
    for restart in range(restarts):
        logs = {n: (quantize(rng.uniform(-1, 1)), quantize(rng.uniform(-1, 1))) for n in names}
        cur, _ = score(spec, logs)
        for step in range(steps):
            temp = 1.5 * (1 - step / steps) + 0.05
            trial = dict(logs)
            for n in rng.sample(names, rng.choice((1, 1, 2))):
                lu, ls = trial[n]
                if rng.random() < 0.5:
                    lu = quantize(lu + rng.gauss(0, 0.25))
                else:
                    ls = quantize(ls + rng.gauss(0, 0.25))
                trial[n] = (lu, ls)
            s, _ = score(spec, trial)
            if s <= cur or rng.random() < math.exp((cur - s) / temp):
                logs, cur = trial, s
            if cur == 0:
                return logs
        print("restart", restart, "ended at", cur, file=sys.stderr, flush=True)
    return None


if __name__ == "__main__":
    spec = {"figure8": FIGURE8, "tilted": TILTED}[sys.argv[1]]
    logs = search(spec, int(sys.argv[2]) if len(sys.argv) > 2 else 0)
    if logs is None:
        sys.exit("no solution found")
    print("# logs", logs, file=sys.stderr)
    print(emit_tangle(build(spec, logs)))
