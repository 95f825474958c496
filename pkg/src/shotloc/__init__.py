"""shotloc: geolocates an impulsive sound source (e.g. a shooter) from
unsynchronized recordings.

Pipeline: synchronize recordings into a global timeline (sync), mark the
shockwave/muzzle-blast arrivals (audio + human), invert per-camera
supersonic timing for distance annuli (ballistics), intersect pairwise
arrival-time differences as hyperbola bands (tdoa), and fuse everything
into a map heatmap (fusion). A forward physics simulator (oracle)
generates ground truth for end-to-end validation.
"""

__version__ = "0.1.0"
