"""Entry point for ``python -m mufno``."""
import logging
import os
import sys

from dotenv import load_dotenv

from mufno.cli import main as cli_main


def main() -> None:
    load_dotenv()
    logging.basicConfig(
        level=os.getenv("MUFNO_LOG_LEVEL", "INFO").upper(),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
