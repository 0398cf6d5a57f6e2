"""Global numeric policy: input-gate tolerances and solver defaults."""

from dataclasses import dataclass, field, replace


@dataclass(frozen=True)
class NumericPolicy:
    unit_tol: float = 1e-12
    tangent_tol: float = 1e-12
    group_tol: float = 1e-10
    cut_locus_margin: float = 1e-9
    exp_zero: float = 1e-14
    degenerate_block: float = 1e-14
    frame_skip: float = 1e-6
    eig_cluster: float = 1e-10
    quad_order: int = 32
    fd_step: float = 1e-4
    lagrangian_tol: float = 1e-8
    two_eigen_rel: float = 1e-8
    grid_tol_factor: float = 0.05
    anneal: tuple = field(default=(0.1, 0.03, 0.01, 0.003, 0.001))

    def with_overrides(self, **kw):
        return replace(self, **kw)


POLICY = NumericPolicy()
