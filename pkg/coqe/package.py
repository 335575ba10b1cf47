from __future__ import annotations
import msgpack
import struct
from typing import Optional, Any

SCHEMA_VERSION = 1


class ReportPackage(object):
    """msgpack body behind a fixed header: length, schema, type and the
    type's complement as check byte."""

    __slots__ = ('length', 'schema', 'tp', 'data', 'total')

    st_package = struct.Struct('<IHBB')

    TP_REPORT = 0x01

    def __init__(self, barray: Optional[bytes] = None):
        self.data: Any = None
        if barray is None:
            return

        if len(barray) < self.__class__.st_package.size:
            raise ValueError('package header incomplete')
        self.length, self.schema, self.tp, checkbit = \
            self.__class__.st_package.unpack_from(barray, offset=0)
        if self.tp != checkbit ^ 0xff:
            raise ValueError('invalid checkbit')
        if self.schema != SCHEMA_VERSION:
            raise ValueError(f'unsupported schema version {self.schema}')
        self.total = self.__class__.st_package.size + self.length

    @classmethod
    def make(cls, tp: int, data: Any) -> ReportPackage:
        pkg = cls()
        pkg.tp = tp
        pkg.schema = SCHEMA_VERSION
        pkg.data = msgpack.packb(data)
        pkg.length = len(pkg.data)
        return pkg

    @classmethod
    def from_bytes(cls, barray: bytes) -> ReportPackage:
        pkg = cls(barray)
        if len(barray) < pkg.total:
            raise ValueError('package body incomplete')
        body = barray[cls.st_package.size:pkg.total]
        pkg.data = msgpack.unpackb(body) if pkg.length else None
        return pkg

    def to_bytes(self) -> bytes:
        header = self.st_package.pack(
            self.length,
            self.schema,
            self.tp,
            self.tp ^ 0xff)

        return header + self.data

    def __repr__(self) -> str:
        return '<schema: {0.schema} size: {0.length} tp: {0.tp}>'.format(self)
