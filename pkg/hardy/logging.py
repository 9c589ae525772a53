# SPDX-License-Identifier: BSD-3-Clause
# Copyright(c) 2024 Ericsson AB


import enum
import logging
import logging.handlers
import sys


class LogCategory(enum.Enum):
    CORE = 'core'
    SOLVER = 'solver'
    VERIFY = 'verify'
    INTERNAL = 'internal'


LOG_FORMAT = "%(asctime)s %(levelname)s [%(msg_id)s] %(message)s"

logger = logging.getLogger()


class _CategoryDefault(logging.Filter):
    # records from third-party libraries carry no category
    def filter(self, record):
        if not hasattr(record, 'msg_id'):
            record.msg_id = LogCategory.INTERNAL.value
        return True


def configure(console=False, log_file=None, log_file_backup=0,
              log_file_max_size=0, filter_level=logging.INFO):
    logging.basicConfig(level=filter_level, stream=sys.stderr,
                        format=LOG_FORMAT)
    logger.setLevel(filter_level)
    if not console:
        logger.handlers = []
    for handler in logger.handlers:
        handler.addFilter(_CategoryDefault())
    if log_file is not None:
        file_handler = \
            logging.handlers.RotatingFileHandler(log_file,
                                                 backupCount=log_file_backup,
                                                 maxBytes=log_file_max_size)
        file_handler.setFormatter(logging.Formatter(LOG_FORMAT))
        add_handler(file_handler)


def add_handler(handler):
    handler.addFilter(_CategoryDefault())
    logger.handlers.append(handler)


def _extra(category):
    return {'msg_id': category.value}


def debug(msg, category):
    logger.debug(msg, extra=_extra(category))


def info(msg, category):
    logger.info(msg, extra=_extra(category))


def warning(msg, category):
    logger.warning(msg, extra=_extra(category))


def exception(msg):
    logger.exception(msg, extra=_extra(LogCategory.INTERNAL))
