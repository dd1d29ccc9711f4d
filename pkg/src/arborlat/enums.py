import enum


class ViolationKind(str, enum.Enum):
    label_range = 'label-range'
    bijectivity = 'bijectivity'
    tau = 'tau'
    legal = 'legal'


class StepStatus(str, enum.Enum):
    passed = 'PASS'
    failed = 'FAIL'


class Conclusion(str, enum.Enum):
    no_obstruction = 'NoObstruction'
    no_common_overlattice = 'NoCommonOverlattice'


class LogLevel(str, enum.Enum):
    debug = 'debug'
    info = 'info'
    stage = 'stage'
    warning = 'warning'
    error = 'error'


loglevelToInt = {LogLevel.debug: 0,
                 LogLevel.info: 1,
                 LogLevel.stage: 2,
                 LogLevel.warning: 3,
                 LogLevel.error: 4}
