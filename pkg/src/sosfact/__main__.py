import sys

from sosfact.cli import main

sys.exit(main())
