"""The numba-compiled and plain-Python kernel paths must agree.

The fallback path is selected at import time by ``RVRSIM_NO_NUMBA``, so it
is exercised in a subprocess and compared against the in-process result.
"""

import os
import subprocess
import sys
import textwrap

import numpy as np

import rvrsim.kernels as kernels

PROBE = textwrap.dedent(
    """
    import numpy as np
    import rvrsim.kernels as k

    assert k.USE_NUMBA == ({use_numba!r})

    rng = np.random.default_rng(1234)
    for trial in range(20):
        N = int(rng.integers(2, 5))
        R = rng.uniform(10.0, 1e6, N)
        w = rng.uniform(0.05, 1.0, N)
        w /= w.sum()
        p = rng.uniform(0.5, 5e4, N)
        gamma = float(rng.choice([1.0, 0.997, 0.95]))
        B, profit = k.arb_solve(R, w, p, gamma)
        print(",".join(repr(float(x)) for x in B), repr(float(profit)))

    T, N = 300, 3
    prices = np.exp(np.cumsum(rng.normal(0, 1e-3, (T, N)), axis=0)) * [4e4, 2.5e3, 1.0]
    weights = np.full((T, N), 1.0 / N)
    R0 = weights[0] * 1e7 / prices[0]
    out = k.amm_loop(prices, weights, R0, 0.997, 0.5, 1, 0.5, True)
    for arr in out:
        print(",".join(repr(float(x)) for x in np.atleast_1d(arr).ravel()[:50]))
    out = k.cex_loop(prices, weights, 1e7, 1e-3, np.array([2e-4, 2e-4, 1e-4]))
    for arr in out[:5]:
        print(",".join(repr(float(x)) for x in np.atleast_1d(arr).ravel()[:50]))
    print(repr(float(out[5])))
    """
)


def run_probe(no_numba: bool) -> str:
    env = dict(os.environ)
    if no_numba:
        env["RVRSIM_NO_NUMBA"] = "1"
    else:
        env.pop("RVRSIM_NO_NUMBA", None)
    script = PROBE.format(use_numba=not no_numba)
    proc = subprocess.run(
        [sys.executable, "-c", script], env=env, capture_output=True, text=True
    )
    assert proc.returncode == 0, proc.stderr
    return proc.stdout


def test_env_flag_selects_path():
    # this test process imported kernels without the flag set
    assert kernels.USE_NUMBA
    out = subprocess.run(
        [sys.executable, "-c", "import rvrsim.kernels as k; print(k.USE_NUMBA)"],
        env={**os.environ, "RVRSIM_NO_NUMBA": "1"},
        capture_output=True,
        text=True,
    )
    assert out.stdout.strip() == "False"


def _parse(out: str):
    return [
        np.array([float(x) for x in line.replace(" ", ",").split(",")])
        for line in out.splitlines()
    ]


def test_numba_and_fallback_agree():
    # numba's log/exp may differ from CPython's libm by an ulp, so the two
    # paths are compared numerically at near machine precision, not bitwise
    a = _parse(run_probe(no_numba=True))
    b = _parse(run_probe(no_numba=False))
    assert len(a) == len(b)
    for row_a, row_b in zip(a, b):
        np.testing.assert_allclose(row_a, row_b, rtol=1e-12, atol=1e-300)


def test_fallback_matches_in_process_numba():
    rng = np.random.default_rng(9)
    R = rng.uniform(100.0, 1e5, 3)
    w = np.array([0.3, 0.6, 0.1])
    p = rng.uniform(1.0, 1e4, 3)
    B, profit = kernels.arb_solve(R, w, p, 0.99)
    lnk = float(np.dot(w, np.log(R)))
    assert float(np.dot(w, np.log(B))) >= lnk - 1e-12
    assert profit >= 0.0
