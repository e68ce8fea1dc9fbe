import sys
from pathlib import Path

# Agregar el directorio src al path de Python
sys.path.insert(0, str(Path(__file__).parent / "src"))

from phasefield.cli import main

if __name__ == "__main__":
    sys.exit(main())
