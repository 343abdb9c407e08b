import sys

from calderon.cli import main

sys.exit(main())
