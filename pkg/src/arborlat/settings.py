from pydantic import BaseSettings


class ArborlatSettings(BaseSettings):
    SEED: int = 0

    CAP_GROUP: int = 100_000
    CAP_VERTICES: int = 2_000_000
    # dense Cayley tables are |G|^2 int32 entries
    CAP_TABLE: int = 5000
    CAP_STABILIZER: int = 100_000

    FIN_CEILING: int = 10_000

    SAMPLE_LABELS: list[int] = [181, 200, 239]

    LOG_LEVEL = 'WARNING'

    ENCODING = 'utf8'

    TEST = False

    class Config:
        env_prefix = 'ARBORLAT_'


settings = ArborlatSettings()
