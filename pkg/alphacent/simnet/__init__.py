from .agent import *
from .audit import *
from .engine import *
from .protocols import *
