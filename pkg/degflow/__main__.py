import sys

from degflow.cli.main import main

sys.exit(main())
