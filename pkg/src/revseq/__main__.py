import sys

from revseq.cli import main

sys.exit(main())
