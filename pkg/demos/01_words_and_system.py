"""Band words, the tau map and the inequality system of a small language."""
from r1qfa import R1Language
from r1qfa.band import enumerate_band, tau, theta_expand
from r1qfa.system import build_system

print("tau('abcbacab') =", tau("abcbacab"))
print("theta_expand('ab', 2, 2) =", theta_expand("ab", 2, 2))

words = enumerate_band("abc")
print(f"{len(words)} duplicate-free words over abc:", words)

L = R1Language.of("abc", ["ab", "bac"])
system = build_system(L)
print(f"{len(system.variables)} variables, {len(system.constraints)} constraints")
for c in system.to_dict()["constraints"][:4]:
    print("  ", c)
