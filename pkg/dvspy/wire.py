""" length-prefixed frames of the tcp transport

A frame is a 4-byte big-endian length of the rest, then a 1-byte tag, a
4-byte big-endian machine id, a 4-byte big-endian vector length p and p
little-endian IEEE-754 doubles.

>>> frame = encode_frame(Tag.GRADIENT_REPLY, 3, [0.5, -1.0])
>>> frame[:4].hex(), frame[4:13].hex()
('00000019', '020000000300000002')
>>> decoded = decode_payload(frame[4:])
>>> decoded.tag, decoded.machine_id, decoded.values.tolist()
(<Tag.GRADIENT_REPLY: 2>, 3, [0.5, -1.0])
"""
import socket
import struct
from enum import IntEnum
from typing import NamedTuple

import numpy as np

from .errors import ProtocolError

_LENGTH = struct.Struct('>I')
_HEADER = struct.Struct('>BII')
_DOUBLES = np.dtype('<f8')
# a frame never carries more than this many doubles
MAX_P = 1 << 27


class Tag(IntEnum):
    BROADCAST_BETA = 0x01
    GRADIENT_REPLY = 0x02


class Frame(NamedTuple):
    tag: Tag
    machine_id: int
    values: np.ndarray


def encode_frame(tag: Tag, machine_id: int, values) -> bytes:
    vec = np.ascontiguousarray(values, dtype=_DOUBLES).reshape(-1)
    body = _HEADER.pack(int(tag), machine_id, vec.shape[0]) + vec.tobytes()
    return _LENGTH.pack(len(body)) + body


def decode_payload(payload: bytes) -> Frame:
    """ decode everything after the length prefix """
    if len(payload) < _HEADER.size:
        raise ProtocolError('frame of {} bytes is shorter than its '
                            'header'.format(len(payload)))
    raw_tag, machine_id, p = _HEADER.unpack_from(payload)
    try:
        tag = Tag(raw_tag)
    except ValueError:
        raise ProtocolError('unknown message tag 0x{:02x}'.format(
            raw_tag)) from None
    expected = _HEADER.size + p * _DOUBLES.itemsize
    if len(payload) != expected:
        raise ProtocolError('frame declares p={} ({} bytes) but carries {} '
                            'bytes'.format(p, expected, len(payload)))
    values = np.frombuffer(payload, dtype=_DOUBLES, count=p,
                           offset=_HEADER.size).astype(float)
    return Frame(tag, machine_id, values)


def _recv_exactly(sock: socket.socket, size: int) -> bytes:
    chunks = []
    remaining = size
    while remaining:
        chunk = sock.recv(min(remaining, 1 << 20))
        if not chunk:
            raise ProtocolError('connection closed with {} of {} bytes '
                                'unread'.format(remaining, size))
        chunks.append(chunk)
        remaining -= len(chunk)
    return b''.join(chunks)


def read_frame(sock: socket.socket) -> Frame:
    (length,) = _LENGTH.unpack(_recv_exactly(sock, _LENGTH.size))
    if length > _HEADER.size + MAX_P * _DOUBLES.itemsize:
        raise ProtocolError('frame length {} is too large'.format(length))
    return decode_payload(_recv_exactly(sock, length))


def write_frame(sock: socket.socket, tag: Tag, machine_id: int,
                values) -> None:
    sock.sendall(encode_frame(tag, machine_id, values))
