import functools
import os
import sys
import tempfile
from pathlib import Path

from swarmlab.errors import SwarmlabError
from swarmlab.rich_utils import Colors, console, print_error


def handle_cli_errors(func):
    """Decorator mapping swarmlab errors to exit codes."""

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except KeyboardInterrupt:
            console.print("\n\n👋 Goodbye!", style=Colors.GREY)
            sys.exit(0)
        except SwarmlabError as e:
            print_error(str(e))
            sys.exit(e.exit_code)
        except Exception as e:
            console.print()
            print_error(f"An unexpected error occurred: {e}")
            sys.exit(4)

    return wrapper


def setup_console():
    """Configures the console for proper emoji support on Windows."""
    if sys.platform == "win32":
        sys.stdout.reconfigure(encoding="utf-8", errors="replace")
        sys.stderr.reconfigure(encoding="utf-8", errors="replace")


def atomic_write_bytes(path: str | Path, data: bytes) -> Path:
    """Write bytes via a temporary sibling file and an atomic rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(data)
        os.replace(tmp_name, path)
    except BaseException:
        try:
            os.unlink(tmp_name)
        except FileNotFoundError:
            pass
        raise
    return path


def atomic_write_text(path: str | Path, content: str) -> Path:
    """Write UTF-8 text with LF line endings atomically."""
    return atomic_write_bytes(path, content.encode("utf-8"))
