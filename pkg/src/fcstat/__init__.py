"""Full counting statistics of charge transport for non-interacting fermions.

The determinant engine samples the charge-transfer generating function
chi(lambda) from counting kernels on the one-particle space; an
independent brute-force oracle reproduces it as a Fock-space trace; the
diagnostics module tracks the Schatten norms behind the regularized
kernel's good behaviour.
"""

__version__ = "0.1.0"

from .diagnostics import (DysonBound, NormReport, ScanResult, VarianceScan,
                          WeakLimitDemo, dyson_hs_check, noncompact_demo,
                          norm_report, relative_change, tenet_scan_depth,
                          tenet_scan_length, variance_vs_length)
from .errors import (AccuracyError, ConfigError, ContractError,
                     ConvergenceError, DegeneracyError,
                     DemoNotApplicableError, DistributionIntegrityError,
                     HypothesisViolationError, NumericalIntegrityError,
                     StructureError, TruncationError)
from .fcs import (ChargeDistribution, CountingKernel, CumulantVector,
                  GeneratingFunctionSamples, charge_distribution, cumulants,
                  generating_function, levitov_kernel, mean_transport_direct,
                  naive_mean, particle_hole_check, regularized_kernel,
                  zero_temperature_kernel)
from .fock import (FockBasis, FockOracle, GibbsState, chi_bruteforce, dgamma,
                   distribution_bruteforce, gamma, gibbs_state,
                   omega_gamma_check, slater_state, state_from_occupation,
                   trdet_identity_check)
from .models import (ChargeProjection, ChiralModel, OccupationOperator,
                     PropagatorSpec, Scenario, StateSpec, TwoLeadLattice,
                     build_chiral, build_lattice_scenario, build_two_lead,
                     deepen_chiral, dyson_first_term, fermi_occupation,
                     mixing_scatter, phase_scatter, propagate,
                     thermal_occupation)
