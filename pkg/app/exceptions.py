class KeiperLiError(Exception):
    """所有计算错误的基类, exit_code 对应命令行退出码"""
    exit_code: int = 64

    def __init__(self, detail: str):
        super().__init__(detail)
        self.detail = detail


class VerificationFailedError(KeiperLiError):
    exit_code = 1


class DomainError(KeiperLiError):
    """参数超出定义域 (ϖ 的 r, Fₙ 的割线, g 的极点, w̃ 范围等)"""
    exit_code = 3


class PrecisionShortfallError(KeiperLiError):
    """表覆盖不足或精度低于计划要求"""
    exit_code = 4


class ZeroTableError(KeiperLiError):
    exit_code = 5

    def __init__(self, detail: str, line_no: int = 0):
        if line_no:
            detail = f"第 {line_no} 行: {detail}"
        super().__init__(detail)
        self.line_no = line_no


class InputFileError(KeiperLiError):
    exit_code = 6
