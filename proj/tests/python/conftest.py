import os
import sys
from pathlib import Path

# prefer an in-tree build when the package is not installed
_build = Path(os.environ.get("SPBVEM_BUILD_DIR", Path(__file__).resolve().parents[2] / "build")) / "python"
try:
    import spbvem  # noqa: F401
except ImportError:
    sys.path.insert(0, str(_build))
