import sys

from src.routing import run


if __name__ == '__main__':
    sys.exit(run())
