import sys

from qdcavity.cli import main

sys.exit(main())
