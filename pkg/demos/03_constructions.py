"""Build the probabilistic, doubly stochastic and unitary recognizers for {ab}."""
from r1qfa import R1Language, decide_consistency
from r1qfa.construct import build_composite, build_dhpra, build_mmqfa, default_n, lift_to_bqfa
from r1qfa.probsim import run_dhpra, run_prob
from r1qfa.quantum import run_mmbqfa, run_mmqfa

L = R1Language.of("abc", ["ab"])
sol = decide_consistency(L)
n = default_n(sol, 3, "dh-pra")

A = build_composite(L, sol)
S = build_dhpra(L, sol, n)
U = build_mmqfa(L, sol, 4)
Q = lift_to_bqfa(build_dhpra(L, sol, 2))
print(f"states: prob={len(A.partition)} dh-pra(n={n})={len(S.partition)} "
      f"mm-qfa(n=4)={len(U.partition)} mm-bqfa(n=2)={len(Q.partition)}")

print(f"{'word':>8} {'member':>6} {'prob':>8} {'dh-pra':>8} {'mm-qfa':>10} {'mm-bqfa':>8}")
for w in ["", "a", "ab", "aabb", "ba", "abc", "cab", "abab"]:
    print(f"{w!r:>8} {str(w in L):>6} {float(run_prob(A, w).p_acc):8.4f} "
          f"{float(run_dhpra(S, w).p_acc):8.4f} {run_mmqfa(U, w).p_acc:10.6f} "
          f"{run_mmbqfa(Q, w).p_acc:8.4f}")
