"""Makes the freshly built extension importable as cfaudit._core.

CFAUDIT_EXT_DIR points at the directory holding _core*.so (the CMake build
tree); CFAUDIT_PKG_DIR at the python/ source dir. A throwaway package dir
combining the two goes on sys.path.
"""

import os
import shutil
import sys
import tempfile
from glob import glob


def _stage_package():
    ext_dir = os.environ.get("CFAUDIT_EXT_DIR")
    pkg_dir = os.environ.get("CFAUDIT_PKG_DIR")
    if not ext_dir or not pkg_dir:
        return  # assume cfaudit is pip-installed
    ext_candidates = glob(os.path.join(ext_dir, "_core*.so"))
    if not ext_candidates:
        raise RuntimeError(f"no _core extension found in {ext_dir}")
    stage = tempfile.mkdtemp(prefix="cfaudit-pytest-")
    dest = os.path.join(stage, "cfaudit")
    os.makedirs(dest)
    shutil.copy(os.path.join(pkg_dir, "cfaudit", "__init__.py"), dest)
    shutil.copy(ext_candidates[0], dest)
    sys.path.insert(0, stage)


_stage_package()
