"""
测试包：精确算术、细化引擎、恒等式验证、π 逼近与命令行
"""
