"""Randomised property suites behind ``loopline check``.

Each suite takes a seed and a trial count and returns a :class:`SuiteResult`.
Suites seed their own generator from ``(seed, name)``, so results do not
depend on the order or the process in which suites run.
"""

from __future__ import annotations

import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from loopline.algebra import RatFunc, identity_matrix, invert_ratfunc_matrix, is_hermitian, mat_mul, matrix_at
from loopline.diagrams import DiagramSeries, pair_glue
from loopline.integration import lmo_integrate_n, wheels_line_check
from loopline.oracles import brute_lmo_integrate, brute_pair_glue
from loopline.presentation import apply_move, cover_linking_oracle, linking_matrix, winding_matrix
from loopline.sampling import (
    prepare_r3,
    random_diagram,
    random_hermitian,
    random_move,
    random_special_presentation,
)
from loopline.series import b2n, b2n_bernoulli

__all__ = ["SuiteResult", "SUITES", "run_suite", "run_all"]


@dataclass
class SuiteResult:
    name: str
    passed: int = 0
    failed: int = 0
    failures: list[str] = field(default_factory=list)

    def record(self, ok: bool, what: str = "") -> None:
        if ok:
            self.passed += 1
        else:
            self.failed += 1
            if len(self.failures) < 5:
                self.failures.append(what)


def _rng(seed: int, name: str) -> random.Random:
    return random.Random(f"{seed}:{name}")


def hermitian_suite(seed: int, trials: int) -> SuiteResult:
    rng, res = _rng(seed, "hermitian"), SuiteResult("hermitian")
    for _ in range(trials):
        p = random_special_presentation(rng)
        w = winding_matrix(p)
        res.record(is_hermitian(w) and matrix_at(w, 1) == linking_matrix(p), repr(p))
    return res


def cover_oracle_suite(seed: int, trials: int) -> SuiteResult:
    rng, res = _rng(seed, "cover-oracle"), SuiteResult("cover-oracle")
    for _ in range(trials):
        p = random_special_presentation(rng)
        res.record(winding_matrix(p) == cover_linking_oracle(p), repr(p))
    return res


def move_suite(seed: int, trials: int) -> SuiteResult:
    """``trials`` moves spread over random walks, including prepared R3 slides."""
    rng, res = _rng(seed, "moves"), SuiteResult("moves")
    done = 0
    while done < trials:
        p = random_special_presentation(rng, max_events=12)
        w = winding_matrix(p)
        for _ in range(10):
            if rng.random() < 0.2:
                moves = prepare_r3(rng, p) or []
            else:
                moves = [random_move(rng, p)]
            for mv in moves:
                p = apply_move(p, mv)
                res.record(winding_matrix(p) == w, repr(mv))
                done += 1
    return res


def wheels_suite(seed: int, trials: int, max_n: int = 3) -> SuiteResult:
    rng, res = _rng(seed, "wheels-line"), SuiteResult("wheels-line")
    for _ in range(trials):
        mu = rng.randint(1, 3)
        n = rng.randint(1, max_n if mu < 3 else min(max_n, 2))
        w = random_hermitian(rng, mu)
        res.record(wheels_line_check(w, n).equal, f"mu={mu} n={n} W={w}")
    return res


def pairing_suite(seed: int, trials: int) -> SuiteResult:
    rng, res = _rng(seed, "pairing"), SuiteResult("pairing")
    for _ in range(trials):
        mu = rng.randint(1, 2)
        n_legs = rng.choice((2, 4)) if mu == 2 else rng.choice((2, 4, 6))
        legs = [f"x{rng.randint(1, mu)}" for _ in range(n_legs)]
        n_tri = rng.choice([t for t in range(max(1, n_legs - 2), n_legs + 2) if (3 * t + n_legs) % 2 == 0])
        d = random_diagram(rng, n_tri, legs)
        weights = [[RatFunc(x) for x in row] for row in random_hermitian(rng, mu, 1)]
        res.record(pair_glue(weights, DiagramSeries.of(d)) == brute_pair_glue(weights, d), repr(d))

        n = rng.randint(1, 2)
        legs = [f"x{i + 1}" for i in range(mu) for _ in range(2 * n)] + ["k"] * rng.randint(0, 2)
        n_tri = rng.choice([t for t in range(0, 2 * n + 1) if (3 * t + len(legs)) % 2 == 0])
        d = random_diagram(rng, n_tri, legs, labels=False, connected=False, no_bare_chords=False)
        names = [f"x{i + 1}" for i in range(mu)]
        fast = lmo_integrate_n(DiagramSeries.of(d), n, names)
        res.record(fast == brute_lmo_integrate(d, n, names).truncate(n), repr(d))
    return res


def inverse_suite(seed: int, trials: int) -> SuiteResult:
    rng, res = _rng(seed, "inverse"), SuiteResult("inverse")
    for _ in range(trials):
        m = random_hermitian(rng, rng.randint(1, 3))
        inv = invert_ratfunc_matrix(m)
        mr = [[RatFunc(x) for x in row] for row in m]
        one = identity_matrix(len(m), RatFunc(1))
        ok = mat_mul(mr, inv) == one and mat_mul(inv, mr) == one and is_hermitian(inv)
        res.record(ok, repr(m))
    return res


def constants_suite(seed: int, trials: int) -> SuiteResult:
    res = SuiteResult("series-constants")
    order = 2 * max(trials, 2)
    res.record(b2n(order) == b2n_bernoulli(order), f"order {order}")
    return res


SUITES = {
    "hermitian": (hermitian_suite, 1),
    "cover-oracle": (cover_oracle_suite, 1),
    "moves": (move_suite, 2),
    "wheels-line": (wheels_suite, 1),
    "pairing": (pairing_suite, 1),
    "inverse": (inverse_suite, 1),
    "series-constants": (constants_suite, 0),
}


def run_suite(name: str, seed: int, trials: int) -> SuiteResult:
    fn, scale = SUITES[name]
    return fn(seed, max(trials * scale, 1) if scale else trials)


def run_all(seed: int, trials: int, jobs: int = 1) -> list[SuiteResult]:
    names = list(SUITES)
    if jobs <= 1:
        return [run_suite(n, seed, trials) for n in names]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(run_suite, names, [seed] * len(names), [trials] * len(names)))
