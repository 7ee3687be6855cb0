"""Square-well dimer crystals, their SSH tight-binding limits, and a
gap-preserving homotopy between the two SSH phases."""

__version__ = "0.1.0"

from .bloch import (BandPoint, CrystalSpec, band_edges, band_gap, dispersion_curve,
                    monodromy, segment_transfer)
from .errors import (GapClosedError, NumericalError, ResourceError, SSHEmergenceError,
                     StabilityError, ValidationError)
from .homotopy import (GapScanRow, HomotopyConfig, deformed_spec, endpoint_topology,
                       gap_scan, min_gap)
from .reduction import (HoppingReport, OrbitalBasis, dimer_crystal, finite_volume_spectrum,
                        hopping_report, matrix_element, ssh_limit, tight_binding_check)
from .single_well import (BoundState, WellParams, asymptotic_energy, eval_wavefunction,
                          solve_ground_state)
from .ssh import (FiniteChain, SSHParams, bloch_symbol, dispersion, edge_mode_count,
                  finite_chain_spectrum, spectral_gap, winding_number)
