"""Quantum noise budgets and dark-matter reach for optomechanical sensor arrays.

The package is organized around the frequency-domain noise model of a
cavity-optomechanical force sensor and its coherent, optionally entangled,
extension to M sensors:

``spectra``      single-sensor susceptibility, cooperativity, quadrature
                 inputs and force-noise budgets (cavity and simplified model)
``arrays``       M-sensor network algebra: weights, combined noise with its
                 residual-vacuum term, array squeezing, array SQL
``oracle``       independent covariance-propagation verifier for every
                 closed-form noise formula
``sensitivity``  resonance-refined adaptive quadrature, integrated
                 sensitivity, observation-run SNR and coupling projections
``scenario``     JSON scenarios with explicit units, plus figure presets
``scans``        figure-level tables (noise budgets, parameter scans)
``cli``          deterministic command-line front end
"""

__version__ = "0.1.0"

from .errors import ConfigError, ConvergenceError, OmsenseError, ScenarioError
from .spectra import (CavityOptics, Oscillator, QuadraturePsds, SqueezedInput,
                      acceleration_asd, bad_cavity_map,
                      cavity_phase_and_cooperativity, displacement_asd,
                      input_quadrature_psds, mechanical_susceptibility,
                      simplified_model_noise_psd, single_sensor_noise_psd,
                      sql_noise_psd, squeezed_noise_closed_form,
                      thermal_momentum_psd)
from .arrays import (ArraySensor, DqsDcsReport, NetworkDiagnostics,
                     NoiseBreakdown, SensorArray, SqueezedNoise,
                     array_noise_psd, array_signal_psd, array_sql_psd,
                     array_squeezed_noise, dqs_vs_dcs_report, identical_array,
                     incoherent_baseline, inverse_variance_weights,
                     matched_weights, optimal_squeezing_angle,
                     residual_vacuum_forms, residual_vacuum_psd,
                     single_sensor_array, uniform_weights, validate_network)
from .oracle import (TransferAssembly, assemble_transfer, complete_unitary,
                     idle_contribution_shortcut, oracle_breakdown,
                     oracle_noise_psd, propagate_covariance,
                     propagate_covariance_eig)
from .sensitivity import (DarkMatterModel, FrequencyGrid, IntegrationResult,
                          ObservationPlan, calibrate_material_factor,
                          integrated_sensitivity, min_detectable_coupling,
                          resonance_refined_grid, snr_observation)
from .scenario import (Scenario, load_scenario, preset_scenario,
                       scenario_from_dict)
