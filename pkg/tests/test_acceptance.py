"""Acceptance criteria, each run at its stated tolerance.

Every criterion prints one ``PASS``/``FAIL`` line; the lines are also gathered into
the pytest terminal summary. The full report for seed 7 is produced through the CLI
twice (criterion 12) and the first copy feeds criteria 2 to 11.
"""

import json
import time

import pytest

from ogk import cli
from ogk import groupoid as gm
from ogk.suites import SuiteConfig, run_suite

pytestmark = pytest.mark.acceptance

SEED = 7
TRIALS = 1000
RESULTS = []


def verdict(number, text, ok):
    line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {text}"
    RESULTS.append(line)
    print(line)
    assert ok, line


@pytest.fixture(scope="module")
def full_runs(tmp_path_factory):
    d = tmp_path_factory.mktemp("acceptance")
    runs = []
    for i in range(2):
        path = d / f"report{i}.json"
        t0 = time.perf_counter()
        code = cli.main(["check", "all", "--seed", str(SEED), "--trials", str(TRIALS), "--omit-timing",
                         "--out", str(path)])
        runs.append((code, time.perf_counter() - t0, path.read_bytes()))
    return runs


@pytest.fixture(scope="module")
def suites(full_runs):
    doc = json.loads(full_runs[0][2])
    return {s["suite"]: s["checks"] for s in doc["suites"]}


def select(checks, prefix):
    found = [c for c in checks if c["name"].startswith(prefix)]
    assert found, f"no checks named {prefix}*"
    return found


def worst(checks):
    return min(c["slack"] for c in checks)


def all_within(checks, tol):
    return all(c["slack"] >= -tol for c in checks)


def test_criterion_01_norm_engine():
    t0 = time.perf_counter()
    rep = run_suite("norms", SuiteConfig(seed=SEED, trials=TRIALS))
    elapsed = time.perf_counter() - t0
    checks = [c.__dict__ for c in rep.checks]
    gauge = select(checks, "gauge-equals-p-norm:")
    orl = select(checks, "orlicz-equals-twice-2-norm")
    ok = (
        {c["name"] for c in gauge} == {f"gauge-equals-p-norm:p={p}" for p in ("1.5", "2", "3")}
        and all(c["cases"] >= 10_000 for c in gauge + orl)
        and all_within(gauge, 1e-9)
        and all_within(orl, 1e-8)
        and elapsed <= 10.0
    )
    verdict(1, f"gauge worst {worst(gauge):.3g} (tol 1e-9), orlicz worst {worst(orl):.3g} (tol 1e-8), "
               f"{elapsed:.2f}s (<= 10s)", ok)


def test_criterion_02_norm_sandwich(suites):
    checks = select(suites["sandwich"], "sandwich:")
    ok = all_within(checks, 1e-8) and all(c["verdict"] == "pass" for c in suites["sandwich"])
    verdict(2, f"{len(checks)} (groupoid, haar, Young pair) cells, worst slack {worst(checks):.3g} (tol 1e-8)", ok)


def test_criterion_03_holder_and_fenchel_young(suites):
    fy = select(suites["holder"], "fenchel-young:")
    ho = select(suites["holder"], "holder:")
    ok = all_within(fy + ho, 1e-9) and all(c["cases"] >= 10_000 for c in fy + ho)
    verdict(3, f"fenchel-young worst {worst(fy):.3g}, holder worst {worst(ho):.3g} (tol 1e-9), "
               f"min cases {min(c['cases'] for c in fy + ho)}", ok)


def test_criterion_04_pair_convolution_is_matmul(suites):
    ex = select(suites["convolution"], "pair-matmul-exhaustive:n<=6")
    rnd = select(suites["convolution"], "pair-matmul-random:n<=32")
    ok = all_within(ex + rnd, 1e-12) and all(c["cases"] > 0 for c in ex + rnd)
    verdict(4, f"exhaustive dev {-worst(ex):.3g}, random dev {-worst(rnd):.3g} (tol 1e-12)", ok)


def test_criterion_05_translation_isometry(suites):
    checks = select(suites["isometry"], "isometry:")
    counts_ok = True
    for gid in gm.ZOO_IDS:
        g = gm.from_id(gid)
        mine = [c for c in checks if c["name"].startswith(f"isometry:{g.name}:")]
        counts_ok &= bool(mine) and all(c["cases"] >= 100 * g.n for c in mine)
    ok = counts_ok and all_within(checks, 1e-12)
    verdict(5, f"{len(checks)} cells over {len(gm.ZOO_IDS)} groupoids, 100 f per element, "
               f"worst dev {-worst(checks):.3g} (tol 1e-12)", ok)


def test_criterion_06_banach_bound(suites):
    bound = select(suites["banach"], "convolution-bound:")
    comm = select(suites["banach"], "commutative:")
    wit = select(suites["banach"], "noncommuting-witness:bundle:S3")
    ok = (
        all_within(bound, 1e-9)
        and all(c["cases"] >= 1000 for c in bound)
        and all_within(comm, 1e-12)
        and wit[0]["verdict"] == "pass"
    )
    verdict(6, f"bound worst {worst(bound):.3g} (tol 1e-9) on {len(bound)} cells, "
               f"commutativity dev {-worst(comm):.3g} (tol 1e-12), S3 witness {wit[0]['verdict']}", ok)


def test_criterion_07_convolver_bounds(suites):
    left = select(suites["convolvers"], "left-convolver:")
    right = select(suites["convolvers"], "right-convolver:")
    ok = all_within(left + right, 1e-9) and all(c["cases"] >= 1000 for c in left + right)
    verdict(7, f"left worst {worst(left):.3g}, right worst {worst(right):.3g} (tol 1e-9), "
               f"min trials {min(c['cases'] for c in left + right)}", ok)


def test_criterion_08_approximate_identity(suites):
    ident = select(suites["approx_identity"], "identity:")
    mono = select(suites["approx_identity"], "shrinking-monotone:")
    term = select(suites["approx_identity"], "shrinking-terminal:")
    haars = {c["name"].rsplit(":", 1)[1] for c in ident}
    ok = all_within(ident, 1e-12) and haars == {"counting", "density"} and all_within(mono, 0.0) \
        and all_within(term, 1e-12)
    verdict(8, f"e*f dev {-worst(ident):.3g} (tol 1e-12), {len(mono)} filtrations monotone, "
               f"terminal error {-worst(term):.3g} (tol 1e-12)", ok)


def test_criterion_09_ideals_equivalence(suites):
    rand = select(suites["ideals"], "invariant-iff-left-ideal:random")
    pair = select(suites["ideals"], "pair:2-pattern-(1,0)-neither")
    bund = select(suites["ideals"], "bundle:Z2,Z3-pattern-(1,0)-both")
    ok = rand[0]["cases"] >= 200 and all(c["verdict"] == "pass" for c in rand + pair + bund)
    verdict(9, f"{rand[0]['cases']} random subbundles agree: {rand[0]['verdict']}, "
               f"pair counterexample {pair[0]['verdict']}, group-bundle counterexample {bund[0]['verdict']}", ok)


def test_criterion_10_convolutor_pairing(suites):
    cs = suites["convolutor"]
    null = select(cs, "null-representation:")
    mod = select(cs, "right-module-identity:")
    upper = select(cs, "sandwich-upper:")
    anchor = select(cs, "anchor:lower-sandwich-identity:bundle:Z2")
    reps = sum(c["cases"] for c in upper)
    ok = (
        all_within(null, 1e-9)
        and all_within(mod, 1e-12)
        and all_within(upper, 1e-9)
        and reps >= 1000
        and all_within(anchor, 0.0)
    )
    verdict(10, f"null {-worst(null):.3g} (tol 1e-9), right-module {-worst(mod):.3g} (tol 1e-12), "
                f"upper worst {worst(upper):.3g} on {reps} representations, Z2 lower anchor {anchor[0]['verdict']}", ok)


def test_criterion_11_field_surrogate(suites):
    closed = select(suites["field"], "closed-form:z2-linear")
    ratio = select(suites["field"], "refinement-ratio:z2-linear:gauge")
    ok = all_within(closed, 1e-9) and all_within(ratio, 0.0)
    verdict(11, f"closed-form error {-worst(closed):.3g} (tol 1e-9), ratio slack to 0.75 {worst(ratio):.3g}", ok)


def test_criterion_12_determinism(full_runs):
    (c0, t0, b0), (c1, t1, b1) = full_runs
    ok = c0 == 0 and c1 == 0 and b0 == b1 and max(t0, t1) <= 300.0
    verdict(12, f"exit codes {c0},{c1}, identical={b0 == b1}, runs {t0:.1f}s and {t1:.1f}s (<= 300s)", ok)
