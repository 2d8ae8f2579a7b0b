import sys

from ciphermatch.core.app import App
from ciphermatch.utils.logger import logger

app = App()


def main() -> int:
    try:
        return app.run()
    except KeyboardInterrupt:
        logger.info('Interrupted, shutting down...')
        return 130


if __name__ == "__main__":
    sys.exit(main())
