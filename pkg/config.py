"""
项目配置文件
"""
from fractions import Fraction
from pydantic import AliasChoices, Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class PrecisionSettings(BaseSettings):
    """精度与验证配置"""
    model_config = SettingsConfigDict(
        env_prefix="MACHIN_REFINE_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )

    max_precision_bits: int = Field(default=4096, ge=1, description="区间精度提升上限（二进制位）")
    start_precision_bits: int = Field(default=8, ge=1, description="区间精度提升的起始位数")
    direct_verify_max_bits: int = Field(
        default=1 << 22,
        ge=1,
        description="细化恒等式直接展开验证的代价上限（位），超过则由链式证书保证",
    )
    workers: int = Field(default=1, ge=1, description="π 位数计算的并行进程数")


class RefineDefaults(BaseSettings):
    """命令行默认参数"""
    model_config = SettingsConfigDict(
        env_prefix="MACHIN_REFINE_DEFAULT_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )

    a0: int = Field(default=1, description="种子系数 a0")
    a1: int = Field(default=1, description="种子系数 a1")
    u0: str = Field(default="1/2", description="种子参数 u0")
    u1: str = Field(default="1/3", description="种子参数 u1")
    depth: int = Field(default=8, ge=1, description="细化深度")
    eps: str = Field(default="1/" + "1" + "0" * 30, description="π 包围区间宽度")
    strategy: str = Field(default="doubling", description="步进策略 linear/doubling")
    output_format: str = Field(default="table", description="输出格式 table/json/csv")
    r_decimal_places: int = Field(default=12, ge=1, description="r_decimal 截断位数")
    err_decimal_places: int = Field(default=30, ge=1, description="err_lo/err_hi 截断位数")


class LoggingSettings(BaseSettings):
    """日志配置"""
    model_config = SettingsConfigDict(env_file=".env", env_file_encoding="utf-8", extra="ignore")

    console_level: str = Field(
        default="WARNING",
        validation_alias=AliasChoices("CONSOLE_LOG_LEVEL", "console_level"),
        description="控制台日志级别",
    )
    file_level: str = Field(
        default="DEBUG",
        validation_alias=AliasChoices("FILE_LOG_LEVEL", "file_level"),
        description="文件日志级别",
    )
    log_dir: str = Field(
        default="",
        validation_alias=AliasChoices("LOG_DIR", "log_dir"),
        description="日志目录，留空则不写日志文件",
    )
    max_file_size: int = Field(
        default=100,
        validation_alias=AliasChoices("LOG_MAX_FILE_SIZE", "max_file_size"),
        description="日志文件最大大小（MB）",
    )
    backup_count: int = Field(
        default=10,
        validation_alias=AliasChoices("LOG_BACKUP_COUNT", "backup_count"),
        description="日志备份数量",
    )


class AppSettings(BaseSettings):
    """应用配置"""
    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    app_name: str = Field(default="machin-refine", description="应用名称")
    app_version: str = Field(default="1.0.0", description="应用版本")
    debug: bool = Field(
        default=False,
        validation_alias=AliasChoices("MACHIN_REFINE_DEBUG", "debug"),
        description="调试模式（允许跳过种子验证）",
    )

    # 子配置
    precision: PrecisionSettings = PrecisionSettings()
    defaults: RefineDefaults = RefineDefaults()
    logging: LoggingSettings = LoggingSettings()


# 全局配置实例
settings = AppSettings()


def get_settings() -> AppSettings:
    """获取配置实例"""
    return settings


def is_debug_mode() -> bool:
    """是否为调试模式"""
    return settings.debug


def get_max_precision_bits() -> int:
    """获取区间精度上限（位）"""
    return settings.precision.max_precision_bits


def get_precision_floor() -> Fraction:
    """获取允许的最小容差 2^-max_precision_bits"""
    return Fraction(1, 1 << settings.precision.max_precision_bits)
