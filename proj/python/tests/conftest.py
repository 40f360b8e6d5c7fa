import os
import sys

# FOLLMER_KIT_BUILD_PYTHON: import the build-tree package ahead of any installed one
build = os.environ.get("FOLLMER_KIT_BUILD_PYTHON")
if build:
    sys.meta_path[:] = [f for f in sys.meta_path if "follmer_kit" not in type(f).__module__]
    sys.path.insert(0, build)
    sys.modules.pop("follmer_kit", None)
