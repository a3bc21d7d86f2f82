import sys

from eitdecay.cli import main

sys.exit(main())
