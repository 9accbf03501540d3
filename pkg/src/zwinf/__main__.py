from zwinf.cli import main
import sys

sys.exit(main())
