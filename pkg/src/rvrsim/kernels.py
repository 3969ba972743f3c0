"""Hot numeric inner loops.

Every function here is compiled with numba's ``@njit`` unless the
environment variable ``RVRSIM_NO_NUMBA`` is set (or numba is missing),
in which case the same code runs as plain Python/numpy.  The two paths
execute identical arithmetic; ``benchmarks/bench_kernels.py`` compares
their speed.
"""

import os

import numpy as np

USE_NUMBA = os.environ.get("RVRSIM_NO_NUMBA", "").lower() not in ("1", "true", "yes")
if USE_NUMBA:
    try:
        from numba import njit
    except ImportError:  # pragma: no cover
        USE_NUMBA = False

if not USE_NUMBA:

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def wrap(func):
            return func

        return wrap


@njit(cache=True)
def arb_solve(R, w, p, gamma):
    """Optimal arbitrage against a weighted geometric-mean pool with fee.

    The arbitrageur maximises sum_i p_i*(out_i - in_i) subject to the
    post-trade virtual reserves B_i = R_i + gamma*in_i - out_i staying on
    the invariant surface prod B_i^{w_i} = prod R_i^{w_i}, with in/out
    non-negative and no asset traded in both directions.

    At the optimum B_i = lam*w_i/c_i where c_i is p_i for assets the pool
    sells and p_i/gamma for assets it buys; assets whose marginal value
    falls inside the fee band stay untouched.  The feasibility residual
    g(lam) = sum w_i*ln(B_i(lam)) - ln k is continuous, non-decreasing and
    piecewise linear in ln(lam) between the 2N per-asset band edges, so
    the root is found exactly on its bracketing segment.

    Returns (B, profit): the optimal virtual post-trade reserves and the
    arbitrageur's gross profit in numeraire (0 when inside the band).
    """
    N = R.shape[0]
    qmin = np.inf
    qmax = 0.0
    for i in range(N):
        q = p[i] * R[i] / w[i]
        if q < qmin:
            qmin = q
        if q > qmax:
            qmax = q
    if gamma * qmax <= qmin:
        return R.copy(), 0.0

    lnk = 0.0
    for i in range(N):
        lnk += w[i] * np.log(R[i])

    lam_grid = np.empty(2 * N)
    for i in range(N):
        q = p[i] * R[i] / w[i]
        lam_grid[2 * i] = q
        lam_grid[2 * i + 1] = q / gamma
    lam_grid = np.sort(lam_grid)

    # g(lam) at each band edge; the root sits in the first sign-changing segment.
    j = -1
    for idx in range(2 * N):
        lam = lam_grid[idx]
        g = -lnk
        for i in range(N):
            s = lam * w[i] / p[i]
            b = gamma * s
            if s < R[i]:
                g += w[i] * np.log(s)
            elif b > R[i]:
                g += w[i] * np.log(b)
            else:
                g += w[i] * np.log(R[i])
        if g >= 0.0:
            j = idx
            break

    if j <= 0:
        lam_star = lam_grid[0] if j == 0 else lam_grid[2 * N - 1]
    else:
        lo = lam_grid[j - 1]
        hi = lam_grid[j]
        if hi <= lo * (1.0 + 1e-15):
            lam_star = hi
        else:
            mid = np.sqrt(lo * hi)
            S = 0.0
            C = 0.0
            for i in range(N):
                s = mid * w[i] / p[i]
                b = gamma * s
                if s < R[i]:
                    S += w[i]
                    C += w[i] * np.log(w[i] / p[i])
                elif b > R[i]:
                    S += w[i]
                    C += w[i] * np.log(gamma * w[i] / p[i])
                else:
                    C += w[i] * np.log(R[i])
            if S <= 0.0:
                lam_star = hi
            else:
                lam_star = np.exp((lnk - C) / S)
                if lam_star < lo:
                    lam_star = lo
                elif lam_star > hi:
                    lam_star = hi

    B = np.empty(N)
    profit = 0.0
    for i in range(N):
        s = lam_star * w[i] / p[i]
        b = gamma * s
        if s < R[i]:
            B[i] = s
            profit += p[i] * (R[i] - s)
        elif b > R[i]:
            B[i] = b
            profit -= p[i] * (b - R[i]) / gamma
        else:
            B[i] = R[i]
    if profit < 0.0:
        profit = 0.0
    return B, profit


@njit(cache=True)
def amm_loop(prices, weights, R0, gamma, gas_usd, delay, nu, record_k):
    """Simulate the pool over the whole price path.

    An opportunity detected at step t (optimal arb profit > gas) executes
    at t+delay at the prices then prevailing, if still profitable net of
    gas; at most one opportunity is pending at a time.  Executed trades
    move reserves; the pool keeps the full inflow (fee included), and
    noise-trader fee income (1-gamma)*nu*volume is credited as reserves
    bought at market prices in weight proportion.

    Returns per-step arrays: pool value, executed flag, arb profit, arb
    outgoing-leg volume, invariant before/after the trade at that step's
    weights, noise fee income, plus final reserves.  When ``record_k`` is
    false the invariant arrays are filled only on executed steps.
    """
    T, N = prices.shape
    R = R0.copy()
    V = np.empty(T)
    executed = np.zeros(T, np.bool_)
    profit_arr = np.zeros(T)
    volume_arr = np.zeros(T)
    k_before = np.zeros(T)
    k_after = np.zeros(T)
    noise_arr = np.zeros(T)
    pending = False
    exec_step = -1
    for t in range(T):
        p = prices[t]
        w = weights[t]
        do_trade = False
        B = R
        profit = 0.0
        if pending:
            if t == exec_step:
                B, profit = arb_solve(R, w, p, gamma)
                pending = False
                if profit > gas_usd:
                    do_trade = True
        else:
            B, profit = arb_solve(R, w, p, gamma)
            if profit > gas_usd:
                if delay == 0:
                    do_trade = True
                else:
                    pending = True
                    exec_step = t + delay
        if do_trade:
            lnkb = 0.0
            for i in range(N):
                lnkb += w[i] * np.log(R[i])
            vol = 0.0
            for i in range(N):
                if B[i] > R[i]:
                    R[i] = R[i] + (B[i] - R[i]) / gamma
                elif B[i] < R[i]:
                    vol += p[i] * (R[i] - B[i])
                    R[i] = B[i]
            lnka = 0.0
            for i in range(N):
                lnka += w[i] * np.log(R[i])
            # fee retained on inflows can only grow the invariant
            if lnka < lnkb - 1e-9:
                raise RuntimeError("arbitrage solve left the invariant surface")
            fee_income = (1.0 - gamma) * nu * vol
            if fee_income > 0.0:
                for i in range(N):
                    R[i] += w[i] * fee_income / p[i]
            executed[t] = True
            profit_arr[t] = profit
            volume_arr[t] = vol
            k_before[t] = np.exp(lnkb)
            k_after[t] = np.exp(lnka)
            noise_arr[t] = fee_income
        elif record_k:
            lnkc = 0.0
            for i in range(N):
                lnkc += w[i] * np.log(R[i])
            k_before[t] = np.exp(lnkc)
            k_after[t] = k_before[t]
        v = 0.0
        for i in range(N):
            v += R[i] * p[i]
        V[t] = v
    return V, executed, profit_arr, volume_arr, k_before, k_after, noise_arr, R


@njit(cache=True)
def cex_solve_value(R_old, w, p, tau, spreads):
    """Exact solve of the coupled rebalance value/cost system.

    New reserves are pinned to the target weights, R_i(V) = w_i*V/p_i, so
    the system collapses to the scalar equation V = M - cost(V) with
    M = sum R_old_i*p_i.  cost(V) is piecewise linear in V with kinks
    where a leg flips between buy and sell, and V + cost(V) is strictly
    increasing (tau, s_i < 1), so the root is solved exactly on its
    bracketing segment.
    """
    N = R_old.shape[0]
    M = 0.0
    for i in range(N):
        M += R_old[i] * p[i]

    kinks = np.empty(N)
    for i in range(N):
        kinks[i] = R_old[i] * p[i] / w[i]
    kinks = np.sort(kinks)

    # f(V) = V + cost(V) - M; find the first kink with f >= 0
    j = -1
    for idx in range(N):
        V = kinks[idx]
        f = V - M
        for i in range(N):
            d = w[i] * V - R_old[i] * p[i]
            if d > 0.0:
                f += (tau + 0.5 * spreads[i]) * d
            else:
                f -= 0.5 * spreads[i] * d
        if f >= 0.0:
            j = idx
            break

    if j == 0:
        lo = 0.0
        hi = kinks[0]
    elif j < 0:
        lo = kinks[N - 1]
        hi = 2.0 * M if 2.0 * M > lo else 2.0 * lo
    else:
        lo = kinks[j - 1]
        hi = kinks[j]
    mid = 0.5 * (lo + hi)

    # on the segment: cost(V) = a + b*V
    a = 0.0
    b = 0.0
    for i in range(N):
        if w[i] * mid - R_old[i] * p[i] > 0.0:
            a -= (tau + 0.5 * spreads[i]) * R_old[i] * p[i]
            b += (tau + 0.5 * spreads[i]) * w[i]
        else:
            a += 0.5 * spreads[i] * R_old[i] * p[i]
            b -= 0.5 * spreads[i] * w[i]
    V = (M - a) / (1.0 + b)
    if V < lo:
        V = lo
    elif V > hi:
        V = hi
    return V, M


@njit(cache=True)
def cex_costs(R_old, w, p, tau, spreads, V):
    """Commission and spread cost plus turnover for the move to w*V/p."""
    N = R_old.shape[0]
    fee = 0.0
    spread = 0.0
    turnover = 0.0
    for i in range(N):
        d = w[i] * V / p[i] - R_old[i]
        if d > 0.0:
            fee += tau * p[i] * d
            spread += 0.5 * spreads[i] * p[i] * d
            turnover += p[i] * d
        else:
            spread -= 0.5 * spreads[i] * p[i] * d
            turnover -= p[i] * d
    return fee, spread, turnover


@njit(cache=True)
def cex_loop(prices, weights, V0, tau, spreads):
    """Run the CEX-rebalanced portfolio over the whole price path.

    Returns per-step value, commission cost, spread cost and turnover
    arrays, the final reserves, and the worst relative residual of the
    scalar fixed point across all steps.
    """
    T, N = prices.shape
    V = np.empty(T)
    fee_arr = np.zeros(T)
    spread_arr = np.zeros(T)
    turn_arr = np.zeros(T)
    R = np.empty(N)
    for i in range(N):
        R[i] = weights[0, i] * V0 / prices[0, i]
    V[0] = V0
    max_resid = 0.0
    for t in range(1, T):
        p = prices[t]
        w = weights[t]
        Vt, M = cex_solve_value(R, w, p, tau, spreads)
        fee, spread, turnover = cex_costs(R, w, p, tau, spreads, Vt)
        resid = abs(Vt + fee + spread - M) / Vt
        if resid > max_resid:
            max_resid = resid
        for i in range(N):
            R[i] = w[i] * Vt / p[i]
        V[t] = Vt
        fee_arr[t] = fee
        spread_arr[t] = spread
        turn_arr[t] = turnover
    return V, fee_arr, spread_arr, turn_arr, R, max_resid
