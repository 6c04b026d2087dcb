"""Decide recognizability with the exact boxed LP and look at the witness."""
import time

from r1qfa import R1Language, decide_consistency
from r1qfa.forbidden import find_forbidden

cases = {
    "{ab}": R1Language.of("abc", ["ab"]),
    "{bac}": R1Language.of("abc", ["bac"]),
    "{ab,bac}": R1Language.of("abc", ["ab", "bac"]),
    "{abc,bad}": R1Language.of("abcd", ["abc", "bad"]),
    "five letters": R1Language.of(
        "abcde", ["aedbc", "beca", "beda", "bedac", "eacb", "eacbd", "eadbc", "ebca"]
    ),
}

for name, L in cases.items():
    t0 = time.perf_counter()
    c = decide_consistency(L)
    w = find_forbidden(L)
    print(f"{name:>13}: consistent={c.consistent} optimum={c.gap} "
          f"forbidden={'yes' if w else 'no'} ({time.perf_counter() - t0:.2f}s)")

c = decide_consistency(cases["{ab}"])
print("nonzero witness values for {ab}:")
for k, v in c.to_dict()["witness"].items():
    if v != "0/1":
        print(f"   {k} = {v}")
