"""Growth rate of the numerical instability from simulations and from the eigenproblem.

Thin wrapper over ``sslab growth`` with the bundled fig3 config.
"""

import sys

from sslab.cli import main

if __name__ == "__main__":
    argv = ["growth", "--config", "fig3", "--out", "out/fig3"] + sys.argv[1:]
    sys.exit(main(argv))
