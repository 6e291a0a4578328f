import logging
import math

import socketio
from pydantic import ValidationError

from app.core.config import settings
from app.core.exceptions import FeatureError, StreamPoisonedError
from app.detector import SafeDetector
from app.schemas.detector import DetectorConfig

logger = logging.getLogger(__name__)

# Create Socket.IO async server
sio = socketio.AsyncServer(
    async_mode='asgi',
    cors_allowed_origins='*',
    logger=settings.DEBUG,
    engineio_logger=settings.DEBUG,
    ping_timeout=60,
    ping_interval=25
)

# One detector per connected client: {sid: SafeDetector}
sessions = {}


def outcome_payload(outcome) -> dict:
    """Serialize a DetectionOutcome for emission."""
    return {
        't': outcome.t,
        'ns': outcome.ns,
        'zone': outcome.zone.value,
        'Z': outcome.Z,
        'sma': outcome.sma,
        'sigma': outcome.sigma,
        'deviation': outcome.deviation,
        'd': outcome.d,
    }


def open_session(sid: str, config_data=None) -> SafeDetector:
    """Create the detector of a new session; raises when the server is full or the config is invalid."""
    if len(sessions) >= settings.MAX_STREAM_SESSIONS:
        raise ConnectionRefusedError('Too many streaming sessions')
    config = DetectorConfig.model_validate(config_data) if config_data else DetectorConfig()
    detector = SafeDetector(config)
    sessions[sid] = detector
    return detector


@sio.event
async def connect(sid, environ, auth):
    """Open a detector session; ``auth`` may carry ``{'config': {...}}``."""
    config_data = auth.get('config') if isinstance(auth, dict) else None
    try:
        detector = open_session(sid, config_data)
    except ValidationError as exc:
        logger.info("Rejected session %s: invalid detector config", sid)
        raise ConnectionRefusedError(f'Invalid detector config: {exc.error_count()} error(s)')

    logger.info("Session %s opened (%d active)", sid, len(sessions))
    await sio.emit('connected', {
        'message': 'Detector session opened',
        'config': detector.config.model_dump(mode='json', by_alias=True),
    }, to=sid)
    return True


@sio.event
async def disconnect(sid):
    """Drop the session of a leaving client."""
    if sessions.pop(sid, None) is not None:
        logger.info("Session %s closed (%d active)", sid, len(sessions))


@sio.event
async def sample(sid, data):
    """Step the session's detector with one sample (a number or ``{'x': number}``)."""
    detector = sessions.get(sid)
    if detector is None:
        await sio.emit('error', {'message': 'No detector session'}, to=sid)
        return

    value = data.get('x') if isinstance(data, dict) else data
    try:
        x = float(value)
    except (TypeError, ValueError):
        await sio.emit('error', {'message': 'Sample must be a number'}, to=sid)
        return

    try:
        outcome = detector.step(x)
    except StreamPoisonedError as exc:
        await sio.emit('error', {'message': str(exc), 'poisoned': True}, to=sid)
        return
    except FeatureError as exc:
        await sio.emit('error', {'message': str(exc)}, to=sid)
        return

    payload = outcome_payload(outcome)
    if not all(math.isfinite(payload[k]) for k in ('Z', 'sma', 'sigma')):
        logger.warning("Session %s produced a non-finite chart value at t=%d", sid, outcome.t)
    await sio.emit('outcome', payload, to=sid)


@sio.event
async def reset(sid, data=None):
    """Clear the session's detector state, including a poisoned stream."""
    detector = sessions.get(sid)
    if detector is None:
        await sio.emit('error', {'message': 'No detector session'}, to=sid)
        return
    detector.reset()
    await sio.emit('reset_done', {'t': 0}, to=sid)
