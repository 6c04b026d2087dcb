"""Sub-bistochastic channels, their idempotent limits and order independence."""
import numpy as np

from r1qfa.quantum import (
    channel_predicates,
    omega_limit,
    operator_norm,
    random_idempotent_family,
    random_sub_bistochastic,
    superoperator,
    verify_bist_ej,
)

rng = np.random.default_rng(1)
c = random_sub_bistochastic(3, rng)
print("predicates:", channel_predicates(c))
print("superoperator norm:", operator_norm(superoperator(c)))

E, info = omega_limit(c, full_output=True)
print(f"limit via {info.method}, idempotency error {info.idempotency_error:.1e}, "
      f"{len(info.peripheral)} peripheral eigenvalues")

maps = random_idempotent_family(3, 3, rng)
report = verify_bist_ej(maps, rng=rng)
print("order independence:", report.to_dict())
