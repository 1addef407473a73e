from . import errors
from . import lattice
from . import series
from . import scattering
from . import completion
from . import generator
from . import modules

__all__ = ["errors", "lattice", "series", "scattering", "completion", "generator", "modules"]
