from os.path import join
from xml.etree.ElementTree import parse
import matplotlib.pyplot as plt
import os.path
