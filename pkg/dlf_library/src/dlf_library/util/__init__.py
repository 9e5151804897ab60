# Software License Agreement (BSD License)
#
# Copyright (c) 2026, dlf_suite contributors
# All rights reserved. See LICENSE for the full terms.

"""JSON backend for run configurations and metric records.

ujson is preferred when installed (the fastjson extra), then simplejson, then
the standard library.  Every backend used here accepts loads(text) and
dumps(obj, indent=..., sort_keys=...).
"""

try:
    import ujson as json
except ImportError:
    try:
        import simplejson as json
    except ImportError:
        import json  # noqa: F401

__all__ = ["json"]
