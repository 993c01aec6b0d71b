import sys

from dissproj.xp.cli import main

sys.exit(main())
