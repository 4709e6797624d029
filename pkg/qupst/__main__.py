import sys

from qupst.main import main

sys.exit(main())
