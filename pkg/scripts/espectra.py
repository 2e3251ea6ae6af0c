import sys
from pathlib import Path

# 添加项目根目录到系统路径
root_path = str(Path(__file__).parent.parent)
sys.path.append(root_path)

from src.cli.main import main

if __name__ == "__main__":
    sys.exit(main())
