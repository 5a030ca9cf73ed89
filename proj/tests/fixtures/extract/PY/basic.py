import os
import numpy as np
from pandas import DataFrame
