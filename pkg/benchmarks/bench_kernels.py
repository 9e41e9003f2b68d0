"""Time the hot kernels with numba on and off.

Each backend runs in its own interpreter because the switch is read at
import time. Results are checked for agreement before timings are shown.

    python benchmarks/bench_kernels.py [--n 500 1000 2000] [--repeat 5]
"""
import argparse
import json
import os
import subprocess
import sys
import time

import numpy as np

WORKER = r"""
import hashlib, json, sys, time
import numpy as np
from egoclique import kernels, tails
from egoclique.fit import fit_dcsbm
from egoclique.models import choose_clique, embed_clique, generate, make_simulation_spec

ns, repeat = json.loads(sys.argv[1]), int(sys.argv[2])
out = {}

def best(f):
    f()  # warm-up, includes any compilation
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        r = f()
        times.append(time.perf_counter() - t)
    return min(times), r

for n in ns:
    spec = make_simulation_spec("dcsbm", n, seed=0)
    g = embed_clique(generate(spec, 1), choose_clique(n, 10, 2))
    fm = fit_dcsbm(g, 3, seed=0)
    r = fm.rates
    t_e, e = best(lambda: kernels.egonet_degrees(g))
    t_l, lam = best(lambda: kernels.pair_rate_sums(g, r.labels, r.block, r.factor))
    t_p, pv = best(lambda: tails.poisson_sf_array(e, lam))
    pairs = np.diff(g.indptr) * (np.diff(g.indptr) - 1) // 2
    t_b, bv = best(lambda: tails.binom_sf_array(e, pairs, 0.05))
    digest = hashlib.sha256(e.tobytes()).hexdigest()[:12]
    out[n] = {"egonet_degrees": t_e, "pair_rate_sums": t_l, "poisson_sf_array": t_p,
              "binom_sf_array": t_b, "e_digest": digest,
              "lam": lam.tolist(), "pv": pv.tolist()}
print(json.dumps(out))
"""


def run(flag, ns, repeat):
    env = dict(os.environ, EGOCLIQUE_NUMBA=flag)
    proc = subprocess.run([sys.executable, "-c", WORKER, json.dumps(ns), str(repeat)],
                          env=env, capture_output=True, text=True, check=True)
    return json.loads(proc.stdout.strip().splitlines()[-1])


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, nargs="+", default=[500, 1000, 2000])
    ap.add_argument("--repeat", type=int, default=5)
    a = ap.parse_args(argv)

    t0 = time.perf_counter()
    fast = run("1", a.n, a.repeat)
    slow = run("0", a.n, a.repeat)
    print(f"{'n':>6} {'kernel':>18} {'numpy (ms)':>12} {'numba (ms)':>12} {'speedup':>8}")
    for n in map(str, a.n):
        f, s = fast[n], slow[n]
        assert f["e_digest"] == s["e_digest"], "egonet degrees differ between backends"
        np.testing.assert_allclose(f["lam"], s["lam"], rtol=1e-12)
        np.testing.assert_allclose(f["pv"], s["pv"], rtol=1e-11)
        for k in ("egonet_degrees", "pair_rate_sums", "poisson_sf_array", "binom_sf_array"):
            print(f"{n:>6} {k:>18} {1e3 * s[k]:12.2f} {1e3 * f[k]:12.2f} {s[k] / f[k]:7.1f}x")
    print(f"backends agree; total wall time {time.perf_counter() - t0:.1f}s")


if __name__ == "__main__":
    main()
