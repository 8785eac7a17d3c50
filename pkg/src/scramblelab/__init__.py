"""Numerical laboratory for tripartite-information scrambling of unitary channels.

Index convention: the leftmost register part is the most significant digit of
a flat index, matching ``numpy.kron``. Logarithms are base 2.
"""
from .analysis import (CrissCrossForm, MimoForm, MimoVerdict, NonIntegerDims, NotMinimal,
                       ScramblingVerdict, classify, classify_mimo, extract_crisscross,
                       extract_mimo_factors, perfect_tensor_check, verify_subspace_code)
from .channels import (Channel, apply_channel, choi_state, coherent_information, depolarizing,
                       dephasing, diamond_witness, gurvits_separable, identity_channel, mimo_choi,
                       petz_recovery, residual_channel)
from .info import (InfoReport, cmi, entropy, fannes_audenaert_bound, info_report,
                   mimo_tripartite, mutual_information, pinsker_bound, redistribution_rates,
                   renyi2, renyi2_tripartite, tripartite_information, von_neumann)
from .linalg import (DensityMatrix, PureState, Register, UnitaryOp, eig_hermitian, kron,
                     maximally_entangled, partial_trace, schmidt, trace_norm)
from .oto import (OperatorBasis, OtoReport, average_oto, heisenberg_weyl_basis, oto_report,
                  renyi_gap)
from .zoo import (ModMatrix, NonPrimeModulus, NotInvertible, ghz_isometry, haar_unitary,
                  mimo_criteria, mod_inverse, u_capacity_gap, u_counter, u_crisscross, u_mimo,
                  u_scrambler)

__version__ = "0.1.0"
