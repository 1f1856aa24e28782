from .breakpoints import *
from .enumeration import *
from .local import *
from .models import *
from .oracle import *
from .solver import *
