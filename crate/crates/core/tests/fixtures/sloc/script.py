#!/usr/bin/env python3
# comment

import os  # trailing

s = "# not a comment"
t = '#'
    # indented comment
