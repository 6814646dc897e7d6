from __future__ import annotations

import os
import tempfile


def atomic_write(path, data: bytes | str):
    """Write to a temporary file in the target directory, then rename over ``path``."""
    if isinstance(data, str):
        data = data.encode("utf-8")
    path = os.fspath(path)
    fd, tmp = tempfile.mkstemp(dir=os.path.dirname(os.path.abspath(path)), prefix=".tmp-")
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
