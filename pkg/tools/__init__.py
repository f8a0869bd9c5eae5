"""
Tools package for hamop.

Domain operations (exterior algebra, Monge metrics, Hamiltonian checks,
Segre classification, differential operators) and the named checks run by
the CLI and the pipeline:

- KillingCheck: linear Killing-type system
- NonlinearCheck: quadratic second-order system
- PoteminCheck: conditions on the inverse metric and the c-object
- CurvatureCheck: flatness and conformal flatness report
"""

from .check_tools import (
    BaseCheck,
    KillingCheck,
    NonlinearCheck,
    PoteminCheck,
    CurvatureCheck,
    get_checks,
    run_checks,
    ALL_CHECKS,
)

__all__ = [
    # Base class
    'BaseCheck',

    # Checks
    'KillingCheck',
    'NonlinearCheck',
    'PoteminCheck',
    'CurvatureCheck',
    'get_checks',
    'run_checks',
    'ALL_CHECKS',
]
