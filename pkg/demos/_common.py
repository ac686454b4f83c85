"""Output directory shared by the demo scripts."""
import os

OUT = os.environ.get("PERCGRAFT_DEMO_OUT", os.path.join(os.path.dirname(__file__), "out"))
os.makedirs(OUT, exist_ok=True)


def out(name):
    return os.path.join(OUT, name)
