from .constants import *
from .errors import *
from .graph import *
from .trace import *
from .estimation import *
from .consensus import *
from .control import *
from .simnet import *
from .datasets import *

__version__ = "0.1.0"
