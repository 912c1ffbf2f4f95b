import numpy as np

from regimerisk.core.covar import covar_at, solve_u_star
from regimerisk.models.copula_model import CopulaSpec
from regimerisk.models.dist_model import DistSpec
from regimerisk.models.risk_model import RiskLevels


if __name__ == "__main__":
    levels = RiskLevels(alpha=0.05, beta=0.05)
    margin = DistSpec(family="skew_student_t", skew=0.9, shape=8.0)

    # CoVaR of a unit-variance index for increasing copula correlation
    for copula in (CopulaSpec(family="gaussian"), CopulaSpec(family="student", shape=6.0)):
        print(f"{copula.family} copula")
        for rho in np.linspace(0.0, 0.9, 4):
            u_star = solve_u_star(copula, rho, levels)
            value = covar_at(copula, rho, 0.0, 1.0, margin, levels)
            print(f"  rho={rho:.1f}  u*={u_star:.5f}  CoVaR={value:.4f}")
