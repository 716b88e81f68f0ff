"""Numerical tools for eps-strict convexity in hyperbolic space.

Points live on the hyperboloid model of curvature -a^2 (see ``geometry``);
bodies are signed-distance oracles (``bodies``); ``riccati`` integrates the
shape-operator flow and ``criterion`` turns measured curvature into
verdicts.  ``smoothing`` implements Riemannian convolution of distance
functions.
"""

from .bodies import (Ball, ConvexBody, Dilated, EmptyBodyError, GeodesicTube, HalfSpace,
                     Horoball, HyperplaneTube, Intersection, boundary_sample, dilate,
                     distance_to_body, erode, inner_distance)
from .criterion import (check_iff_constant_curvature, check_necessary, check_sufficient,
                        erode_dilate_check, flow_curvature_profile, focal_time, ii_bounds,
                        second_fundamental_form)
from .geometry import SpaceParams, distance, exp_map, log_map, parallel_transport
from .riccati import PinchBounds, integrate_riccati

__version__ = "0.1.0"
