# python main.py --help
import sys

from hci_cli import main

if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))

# Note: This file serves as an entry point.
# Run with: python main.py <command> [options]
# For a quick look at the weights of a snapshot: python main.py weights snapshot.csv --out weights.csv
