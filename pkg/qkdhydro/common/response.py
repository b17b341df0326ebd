import json
from typing import Generic, Optional, TypeVar

from pydantic import BaseModel

from qkdhydro.common.message import ErrorCode

Object = TypeVar("Object")


class Response(BaseModel, Generic[Object]):
    message: str = ErrorCode.SUCCESS.value
    data: Optional[Object] = None

    def dump(self) -> str:
        """Stable JSON document: sorted keys, no null fields."""
        return json.dumps(self.model_dump(mode="json", exclude_none=True), indent=2, sort_keys=True) + "\n"
