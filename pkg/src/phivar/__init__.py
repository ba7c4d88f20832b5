"""Quartic-energy stability toolkit for isometrically embedded manifolds.

Charts and quadrature for embedded hypersurfaces and products, pointwise
stability-form verdicts, quartic ("phi") and p-energies of maps with their
first and second variation formulas, averaged second-variation identities,
energy-decay flows along conformal target deformations, and spectral
index/nullity counts for identity maps of spheres.
"""

from .errors import (ConfigError, DegenerateFrame, DimensionTooSmall,
                     GeodesicIntegrationFailure, NoDescentDirection,
                     NonConvergence, NotHypersurface, NotPhiHarmonic,
                     PhivarError, ProjectionDivergence,
                     RepresentationUnsupported, StalledDecay, StepUnderflow)
from .charts import (FrameBatch, FramedPoint, ImmersionChart, QuadratureSet,
                     build_frames, build_frames_batch, build_quadrature,
                     chart_from_config, ellipsoid_chart, grid_shape,
                     hypersurface_frames_at, paraboloid_chart,
                     principal_curvatures, sphere_chart,
                     tangent_frames_batch, torus_chart)
from .ssu import (SsuVerdict, SymmetricForm, b1_norm_criterion, check_p_ssu,
                  check_phi_ssu, ellipsoid_curvature_bounds,
                  hypersurface_p_criterion, hypersurface_phi_criterion,
                  minimal_in_ellipsoid_criterion, minimal_in_sphere_criterion,
                  phi_form, phi_form_batch, q_operator, q_operator_batch)
from .maps import (circle_power_map, constant_map, energy, equator_map,
                   identity_map, latitude_circle_map, map_from_config,
                   p_energy, phi_energy, phi_tension, tension_sup_norm,
                   warped_circle_map)
from .variations import (VariationSpec, ambient_variation,
                         average_second_variation_domain,
                         average_second_variation_target,
                         callback_variation, fd_first_variation,
                         fd_second_variation, first_variation,
                         geodesic_endpoint, harmonicity_residual,
                         second_variation)
from .flows import (DecayTrace, FlowedMapState, compose_energy,
                    discrete_phi_descent, flow_derivatives, homotopy_decay,
                    integrate_flow, select_descent_direction)
from .spectral import (SpectrumModel, VectorFieldOnManifold,
                       conformal_dirichlet_value, conformal_gradient_field,
                       custom_field, eigen_gradient_field,
                       hessian_quadratic_form, killing_field, load_spectrum,
                       p_index_nullity, phi_index_nullity,
                       phi_unstable_criterion, sphere_harmonic_multiplicity,
                       sphere_spectrum, spectrum_from_config,
                       spectrum_to_config, theorem91_table)
from .report import Report, polyline_svg, rows_to_csv
from .acceptance import run_acceptance

__version__ = "0.1.0"
