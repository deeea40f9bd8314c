import logging
import math

from mpmath import mp, mpf

from app.schemas.detection import EndpointSlopes, MagnitudeEstimate, ViolationHypothesis
from app.services.precision_service import PEAK_RATIO

logger = logging.getLogger(__name__)


class DetectionService:
    """违反 RH 的零点何时在 Λₙ 中可见的数量级估计 (忽略对数与常数因子)"""

    @staticmethod
    def tn_exponent(t: float) -> float:
        return 1 + 2 / t

    @staticmethod
    def tni_exponent(t: float) -> float:
        """周期 2 平均之后的交叉指数"""
        return 1 + 1 / t

    def threshold_tn(self, h: ViolationHypothesis) -> MagnitudeEstimate:
        """n ≳ T^(1+2/t)"""
        return MagnitudeEstimate.from_log10(self.tn_exponent(h.t) * math.log10(h.T))

    def threshold_tni(self, h: ViolationHypothesis) -> MagnitudeEstimate:
        """n ≳ T^(1+1/t)"""
        return MagnitudeEstimate.from_log10(self.tni_exponent(h.t) * math.log10(h.T))

    @staticmethod
    def signal_magnitude(h: ViolationHypothesis, n) -> float:
        """|Fₙ(ρ)| ≈ (1/(T² ln n)) (2n/T)^t, ρ = ½ + t + iT; n 可以超出 float 范围 (传入 int)"""
        log_n = math.log(n)
        log_value = -2 * math.log(h.T) - math.log(log_n) + h.t * (math.log(2) + log_n - math.log(h.T))
        return math.exp(log_value)

    @staticmethod
    def theta_endpoint_slopes(n: int, digits: int = 30) -> EndpointSlopes:
        """Θ′ₙ(0) = n(2n+1), Θ′ₙ(π) = Σₘ₌₁ⁿ 1/(4m−1) = ¼[ψ(n+¾) + γ + 3 ln 2 − π/2]"""
        with mp.workdps(digits + 10):
            harmonic = mp.fsum(mpf(1) / (4 * m - 1) for m in range(1, n + 1))
            digamma = (mp.digamma(n + mpf(3) / 4) + mp.euler + 3 * mp.log(2) - mp.pi / 2) / 4
            return EndpointSlopes(n=n, slope0=n * (2 * n + 1), slope_pi=+harmonic, slope_pi_digamma=+digamma)

    @staticmethod
    def required_working_digits(n) -> MagnitudeEstimate:
        """在阈值 n 处计算 Λₙ 约需 0.76555·n 位十进制精度"""
        return MagnitudeEstimate.from_log10(math.log10(PEAK_RATIO) + math.log10(n))

    def report(self, h: ViolationHypothesis) -> str:
        tn = self.threshold_tn(h)
        tni = self.threshold_tni(h)
        lines = [
            f"t = {h.t:g}, T = {h.T:g}, T0 = {h.T0:g}",
            f"TN  指数 1+2/t = {self.tn_exponent(h.t):.4f}, n ≳ {tn}",
            f"TNI 指数 1+1/t = {self.tni_exponent(h.t):.4f}, n ≳ {tni}",
            f"TNI 处所需工作精度 ≈ {MagnitudeEstimate.from_log10(math.log10(PEAK_RATIO) + tni.log10)} 位",
        ]
        return "\n".join(lines)


# 创建单例实例
detection_service = DetectionService()
