import sys

from whodunnit.cli import main


sys.exit(main())
