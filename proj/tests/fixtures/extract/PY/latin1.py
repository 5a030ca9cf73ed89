# caf�
import re
name = '�'
