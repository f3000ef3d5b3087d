"""Module entrypoint for ``python -m rass``."""

from rass.cli import main


if __name__ == "__main__":
    main()
