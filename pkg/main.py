#!/usr/bin/env python3
"""
Machin 型公式细化工具主入口
"""
import sys

from cli import main

if __name__ == "__main__":
    sys.exit(main())
