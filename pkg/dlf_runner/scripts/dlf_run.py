#!/usr/bin/env python3
# Software License Agreement (BSD License)
#
# Copyright (c) 2026, dlf_suite contributors
# All rights reserved. See LICENSE for the full terms.

import sys

from dlf_runner import main

if __name__ == "__main__":
    sys.exit(main())
