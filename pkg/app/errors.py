# -*- coding: utf-8 -*-
"""
错误类型定义

main.py 根据类型映射退出码: ConfigError / 规则文件错误 → 2，NumericError → 3
"""


class ConfigError(ValueError):
    """配置错误 (未知任务、字段越界、维度不匹配等)"""


class NumericError(ArithmeticError):
    """数值错误 (NaN / Inf)"""


class UsageError(RuntimeError):
    """调用顺序错误 (未前向就反向、episode 结束后继续 step)"""


class GenerationError(RuntimeError):
    """环境布局无法生成"""


class RuleSyntaxError(ValueError):
    """规则文本语法错误，携带行列位置和期望的 token"""

    def __init__(self, message: str, line: int, column: int, expected: tuple = ()):
        self.line = line
        self.column = column
        self.expected = tuple(expected)
        hint = f"，期望: {' | '.join(self.expected)}" if self.expected else ""
        super().__init__(f"第 {line} 行第 {column} 列: {message}{hint}")


class UnknownPredicateError(ValueError):
    """谓词不在领域词表中"""


class UnboundVariableError(ValueError):
    """规则头或否定文字中的变量未被正文字绑定"""
